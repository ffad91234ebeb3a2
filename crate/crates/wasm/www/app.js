import init, { potential_profile, fiber_scan, ground_state } from "./pkg/logsp_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, xs, series, { logx = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const fx = logx ? Math.log10 : (x) => x;
  const x0 = fx(xs[0]), x1 = fx(xs[xs.length - 1]);
  const all = series.flatMap((s) => Array.from(s.ys)).filter(Number.isFinite);
  let y0 = Math.min(...all), y1 = Math.max(...all);
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((fx(x) - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  if (y0 < 0 && y1 > 0) {
    ctx.beginPath(); ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0)); ctx.stroke();
  }
  ctx.fillStyle = "#222";
  ctx.fillText(y1.toPrecision(4), 2, pad);
  ctx.fillText(y0.toPrecision(4), 2, h - pad);
  ctx.fillText(String(xs[0].toPrecision(3)), pad, h - pad + 14);
  ctx.fillText(String(xs[xs.length - 1].toPrecision(3)), w - pad - 30, h - pad + 14);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
    ctx.stroke();
  }
}

function heatmap(canvas, n, values) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  const max = Math.max(...values.map(Math.abs)) || 1;
  for (let k = 0; k < n * n; k++) {
    const s = values[k] / max;
    const r = s > 0 ? 255 : Math.round(255 * (1 + s));
    const b = s < 0 ? 255 : Math.round(255 * (1 - s));
    const g = Math.round(255 * (1 - Math.abs(s)));
    img.data.set([r, g, b, 255], 4 * k);
  }
  const tmp = document.createElement("canvas");
  tmp.width = tmp.height = n;
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function guarded(out, f) {
  return () => {
    try {
      f();
    } catch (e) {
      if (out) out.textContent = `error: ${e.message ?? e}`;
      else alert(e.message ?? e);
    }
  };
}

function runPotential() {
  const samples = 400;
  const radius = num("pot-radius");
  const ys = potential_profile($("pot-name").value, radius, samples);
  const xs = Array.from({ length: samples }, (_, i) => (i * radius) / (samples - 1));
  plot($("pot-plot"), xs, [{ ys, color: "#1f77b4" }]);
}

function runFiber() {
  const fiber = fiber_scan($("fib-family").value, $("fib-pot").value, num("fib-p"), num("fib-b"), num("fib-amp"), 20);
  const t = Array.from(fiber.t);
  plot($("fib-plot"), t, [{ ys: fiber.energy, color: "#1f77b4" }, { ys: fiber.derivative, color: "#d62728" }], { logx: true });
  const k = Array.from(fiber.derivative).findIndex((d) => d < 0);
  $("fib-out").textContent =
    `blue: energy, red: derivative\nsign changes: ${fiber.sign_changes}` +
    (k > 0 ? `\nmaximizer in [${t[k - 1].toPrecision(5)}, ${t[k].toPrecision(5)}]` : "");
  fiber.free();
}

function runGroundState() {
  const out = $("gs-out");
  out.textContent = "solving...";
  setTimeout(guarded(out, () => {
    const t0 = performance.now();
    const gs = ground_state($("gs-pot").value, num("gs-p"), num("gs-b"), Number($("gs-n").value), 12);
    const values = Array.from(gs.values);
    heatmap($("gs-plot"), gs.n, values);
    const res = gs.residuals;
    out.textContent =
      `method     ${gs.method}\nlevel      ${gs.level.toPrecision(12)}\n` +
      `converged  ${gs.converged} after ${gs.iterations} iterations\n` +
      `residual   ${res.length ? res[res.length - 1].toExponential(2) : "-"}\n` +
      `time       ${((performance.now() - t0) / 1000).toFixed(2)} s`;
    gs.free();
  }), 0);
}

await init();
$("pot-run").onclick = guarded(null, runPotential);
$("fib-run").onclick = guarded($("fib-out"), runFiber);
$("gs-run").onclick = runGroundState;
runPotential();
