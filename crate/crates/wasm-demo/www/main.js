import init, { partition, recursion, honest_fit } from "./pkg/honest_forest_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(info, f) {
  try {
    info.classList.remove("err");
    return JSON.parse(f());
  } catch (e) {
    info.textContent = String(e);
    info.classList.add("err");
    return null;
  }
}

// Maps data coordinates to canvas pixels with a margin.
function frame(canvas, xmin, xmax, ymin, ymax, pad = 30) {
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  return {
    x: (v) => pad + ((v - xmin) / (xmax - xmin)) * w,
    y: (v) => canvas.height - pad - ((v - ymin) / (ymax - ymin)) * h,
  };
}

function axes(ctx, canvas, f, xmin, xmax, ymin, ymax) {
  ctx.strokeStyle = "#999";
  ctx.strokeRect(f.x(xmin), f.y(ymax), f.x(xmax) - f.x(xmin), f.y(ymin) - f.y(ymax));
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(String(xmin), f.x(xmin), f.y(ymin) + 14);
  ctx.fillText(String(xmax), f.x(xmax) - 10, f.y(ymin) + 14);
  ctx.fillText(ymin.toFixed(2), 2, f.y(ymin));
  ctx.fillText(ymax.toFixed(2), 2, f.y(ymax) + 8);
}

function line(ctx, f, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  let pen = false;
  xs.forEach((x, i) => {
    const y = ys[i];
    if (y === null || !Number.isFinite(y)) {
      pen = false;
      return;
    }
    if (pen) ctx.lineTo(f.x(x), f.y(y));
    else ctx.moveTo(f.x(x), f.y(y));
    pen = true;
  });
  ctx.stroke();
}

function drawPartition() {
  const info = $("p-info");
  const kind = $("p-kind").value;
  const v = call(info, () =>
    partition(kind, num("p-size"), num("p-p1"), num("p-n"), num("p-alpha"), num("p-seed")),
  );
  if (!v) return;
  const canvas = $("p-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const f = frame(canvas, 0, 1, 0, 1, 10);
  ctx.fillStyle = "rgba(40, 90, 160, 0.35)";
  for (const [x, y] of v.points) ctx.fillRect(f.x(x) - 1, f.y(y) - 1, 2, 2);
  ctx.strokeStyle = "#222";
  ctx.lineWidth = 0.8;
  for (const [x0, y0, x1, y1] of v.leaves) {
    ctx.strokeRect(f.x(x0), f.y(y1), f.x(x1) - f.x(x0), f.y(y0) - f.y(y1));
  }
  info.textContent = `${v.leaves.length} leaves, smallest volume ${v.min_volume.toExponential(3)}`;
}

function drawRecursion() {
  const info = $("r-info");
  const v = call(info, () => recursion(num("r-p"), num("r-depth"), num("r-reps"), num("r-seed")));
  if (!v) return;
  const canvas = $("r-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const kmax = v.depth[v.depth.length - 1];
  const f = frame(canvas, 0, kmax, 0, 1);
  axes(ctx, canvas, f, 0, kmax, 0, 1);
  ctx.setLineDash([5, 4]);
  line(ctx, f, [0, kmax], [v.limit, v.limit], "#999");
  ctx.setLineDash([]);
  line(ctx, f, v.depth, v.g1, "#1a5fb4");
  ctx.fillStyle = "#c01c28";
  ctx.strokeStyle = "#c01c28";
  v.depth.forEach((k, i) => {
    const e = v.empirical[i];
    if (e === null) return;
    const se = v.empirical_std_err[i];
    ctx.beginPath();
    ctx.arc(f.x(k), f.y(e), 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.beginPath();
    ctx.moveTo(f.x(k), f.y(e - 2 * se));
    ctx.lineTo(f.x(k), f.y(e + 2 * se));
    ctx.stroke();
  });
  info.textContent =
    `exact recursion (blue), simulated trees with 2 s.e. bars (red), limit ${v.limit.toFixed(4)} (dashed)`;
}

function drawFit() {
  const info = $("f-info");
  const v = call(info, () => honest_fit(num("f-n"), num("f-depth"), num("f-sigma"), 400, num("f-seed")));
  if (!v) return;
  const canvas = $("f-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const ys = v.sample_y.concat(v.truth);
  const lo = Math.min(...ys);
  const hi = Math.max(...ys);
  const f = frame(canvas, 0, 1, lo, hi);
  axes(ctx, canvas, f, 0, 1, lo, hi);
  ctx.fillStyle = "rgba(120, 120, 120, 0.35)";
  v.sample_x.forEach((x, i) => ctx.fillRect(f.x(x) - 1, f.y(v.sample_y[i]) - 1, 2, 2));
  line(ctx, f, v.x, v.truth, "#26a269");
  line(ctx, f, v.x, v.estimate, "#c01c28");
  const empty = v.estimate.filter((e) => e === null).length;
  info.textContent =
    `${v.leaves} leaves, ${v.n_i} prediction points, ${v.n_j} growing points; ` +
    `truth (green), honest estimate (red)` + (empty ? `; ${empty} grid points fall in empty leaves` : "");
}

await init();
$("p-run").addEventListener("click", drawPartition);
$("r-run").addEventListener("click", drawRecursion);
$("f-run").addEventListener("click", drawFit);
$("p-kind").addEventListener("change", drawPartition);
drawPartition();
drawRecursion();
drawFit();
