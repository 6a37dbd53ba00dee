import init, { synth_image, filter_rgba, scene_points, scale_check, metrics_curve } from "./pkg/plflow_wasm.js";

const W = 96, H = 64;
const $ = (id) => document.getElementById(id);

function showValue(input) {
  const out = input.parentElement.querySelector("output");
  if (out) out.textContent = input.value;
}

function draw(canvas, rgba) {
  canvas.width = W;
  canvas.height = H;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), W, H), 0, 0);
}

// ---- 1. filtering -----------------------------------------------------------

function runFilter() {
  const preset = $("f-preset").value;
  const sigmaS = +$("f-sigma-s").value;
  const sigmaC = +$("f-sigma-c").value;
  const input = synth_image(W, H, +$("f-noise").value, 7);
  draw($("f-input"), input);

  let t = performance.now();
  const fast = filter_rgba(input, W, H, preset, sigmaS, sigmaC, false);
  const tLattice = performance.now() - t;
  draw($("f-lattice"), fast);
  $("f-lattice-cap").textContent = `lattice, ${tLattice.toFixed(1)} ms`;

  const ctx = $("f-exact-out").getContext("2d");
  if (!$("f-exact").checked) {
    ctx.clearRect(0, 0, W, H);
    $("f-exact-cap").textContent = "exact (disabled)";
    $("f-stats").textContent = "";
    return;
  }
  t = performance.now();
  const exact = filter_rgba(input, W, H, preset, sigmaS, sigmaC, true);
  const tExact = performance.now() - t;
  draw($("f-exact-out"), exact);
  $("f-exact-cap").textContent = `exact, ${tExact.toFixed(1)} ms`;

  let worst = 0, sum = 0, count = 0;
  for (let i = 0; i < fast.length; i++) {
    if (i % 4 === 3) continue;
    const d = Math.abs(fast[i] - exact[i]);
    worst = Math.max(worst, d);
    sum += d;
    count++;
  }
  $("f-stats").textContent =
    `${W * H} pixels  |lattice - exact| mean ${(sum / count).toFixed(2)}, max ${worst} (of 255)  ` +
    `speed-up ${(tExact / tLattice).toFixed(1)}x`;
}

// ---- 2. back-projection -------------------------------------------------------

const SW = 160, SH = 96;

function runScene() {
  const lambda = +$("s-lambda").value;
  const dim = +$("s-dim").value;
  const pts = scene_points(SW, SH, lambda);
  const canvas = $("s-top");
  const ctx = canvas.getContext("2d");
  const size = canvas.width, range = 100;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, size, size);
  ctx.strokeStyle = "#eee";
  for (let m = 10; m <= range; m += 10) {
    const y = size - (m / range) * size;
    ctx.beginPath(); ctx.moveTo(0, y); ctx.lineTo(size, y); ctx.stroke();
  }
  ctx.fillStyle = "rgba(31, 119, 180, 0.35)";
  for (let i = 0; i < pts.length; i += 3) {
    const x = size / 2 + (pts[i] / range) * size;
    const y = size - (pts[i + 2] / range) * size;
    if (x >= 0 && x < size && y >= 0 && y < size) ctx.fillRect(x, y, 1.5, 1.5);
  }
  const dev = scale_check(SW, SH, lambda, dim);
  $("s-stats").textContent =
    `${pts.length / 3} valid pixels back-projected (sky skipped)\n` +
    `lattice coords of the scaled scene vs ${lambda} x original: worst relative deviation ${dev.toExponential(2)}`;
}

// ---- 3. metrics curve ---------------------------------------------------------

const SERIES = [
  { col: 2, color: "#1f77b4" },
  { col: 3, color: "#2ca02c" },
  { col: 4, color: "#d62728" },
  { col: 6, color: "#9467bd" },
];

function runMetrics() {
  const steps = 21;
  const maxNoise = +$("m-noise").value;
  const points = Math.max(10, Math.min(20000, +$("m-points").value || 2000));
  const flat = metrics_curve(points, maxNoise, steps, $("m-standard").value, 11);
  const rows = [];
  for (let i = 0; i < flat.length; i += 7) rows.push(flat.slice(i, i + 7));

  const canvas = $("m-plot");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 36];
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 8, w - 2 * pad, h - pad - 8);
  const px = (s) => pad + (s / maxNoise) * (w - 2 * pad);
  const py = (v) => h - pad - v * (h - pad - 8);

  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText("0", pad - 10, h - pad + 4);
  ctx.fillText("1", pad - 10, 14);
  ctx.fillText(`noise sigma (m), 0 to ${maxNoise}`, w / 2 - 50, h - 10);

  const epeMax = Math.max(...rows.map((r) => r[1]), 1e-9);
  ctx.fillText(epeMax.toFixed(2), w - pad + 4, 14);

  const line = (values, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    rows.forEach((r, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, px(r[0]), py(values(r))));
    ctx.stroke();
  };
  for (const s of SERIES) line((r) => r[s.col], s.color);
  line((r) => r[1] / epeMax, "#888");
}

// ---- wiring -------------------------------------------------------------------

await init();

for (const input of document.querySelectorAll("input[type=range]")) {
  showValue(input);
  input.addEventListener("input", () => showValue(input));
}

$("f-run").addEventListener("click", runFilter);
$("s-lambda").addEventListener("input", runScene);
$("s-dim").addEventListener("change", runScene);
for (const id of ["m-standard", "m-noise", "m-points"]) $(id).addEventListener("input", runMetrics);

runFilter();
runScene();
runMetrics();
