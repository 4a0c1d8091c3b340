import init, { space_time, p_scan, op_curve } from "./pkg/cpree_wasm.js";

const num = (id) => Number(document.getElementById(id).value);
const seed = () => BigInt(Math.max(0, Math.floor(num("seed"))));
const COLORS = [[244, 244, 244], [207, 227, 247], [215, 48, 31], [215, 48, 31]];

function report(id, f) {
  try {
    f();
  } catch (e) {
    document.getElementById(id).textContent = String(e.message ?? e);
  }
}

function drawSpaceTime() {
  const l = num("st-l"), rows = 200, width = 2 * l + 1;
  const cells = space_time(num("gamma"), num("delta0"), num("delta1"), num("st-p"), l, num("st-t"), rows, seed());
  const canvas = document.getElementById("st-canvas");
  const off = new OffscreenCanvas(width, rows);
  const img = off.getContext("2d").createImageData(width, rows);
  cells.forEach((c, i) => {
    // Time runs upward.
    const row = rows - 1 - Math.floor(i / width), col = i % width;
    const k = 4 * (row * width + col);
    img.data.set([...COLORS[c], 255], k);
  });
  off.getContext("2d").putImageData(img, 0, 0);
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

// Plots points (x, y, lo, hi) on [0,1]^2, with an optional reference curve.
function plot(canvasId, xs, ys, lo, hi, ref) {
  const canvas = document.getElementById(canvasId);
  const ctx = canvas.getContext("2d");
  const pad = 30, w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  const px = (x) => pad + x * w, py = (y) => pad + (1 - y) * h;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#555";
  ctx.fillText("0", pad - 10, py(0));
  ctx.fillText("1", pad - 10, py(1) + 8);
  ctx.fillText("p", px(1) - 4, py(0) + 16);
  if (ref) {
    ctx.strokeStyle = "#2b8cbe";
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ref[i])) : ctx.moveTo(px(x), py(ref[i]))));
    ctx.stroke();
  }
  ctx.strokeStyle = "#d7301f";
  ctx.fillStyle = "#d7301f";
  xs.forEach((x, i) => {
    ctx.beginPath();
    ctx.moveTo(px(x), py(lo[i]));
    ctx.lineTo(px(x), py(hi[i]));
    ctx.stroke();
    ctx.fillRect(px(x) - 2, py(ys[i]) - 2, 4, 4);
  });
}

function runScan() {
  const steps = num("ps-steps");
  const out = p_scan(num("gamma"), num("delta0"), num("delta1"), num("ps-l"), num("ps-t"), steps, num("ps-reps"), num("ps-thr"), seed());
  const xs = [], ys = [], lo = [], hi = [];
  for (let i = 0; i <= steps; i++) {
    xs.push(i / steps);
    ys.push(out[3 * i]);
    lo.push(out[3 * i + 1]);
    hi.push(out[3 * i + 2]);
  }
  plot("ps-canvas", xs, ys, lo, hi, null);
  const pc = out[out.length - 1];
  document.getElementById("ps-out").textContent = Number.isNaN(pc)
    ? "no crossing of the threshold on this grid"
    : `pseudo-critical p = ${pc.toFixed(4)}`;
}

function runOp() {
  const steps = num("op-steps");
  const out = op_curve(num("op-depth"), steps, num("op-reps"), seed());
  const xs = [], ys = [], lo = [], hi = [], exact = [];
  for (let i = 0; i <= steps; i++) {
    xs.push(i / steps);
    ys.push(out[4 * i]);
    lo.push(out[4 * i + 1]);
    hi.push(out[4 * i + 2]);
    exact.push(out[4 * i + 3]);
  }
  const hasExact = !exact.some(Number.isNaN);
  plot("op-canvas", xs, ys, lo, hi, hasExact ? exact : null);
  document.getElementById("op-out").textContent = hasExact
    ? "red: Monte Carlo with 95% intervals, blue: exact enumeration"
    : "red: Monte Carlo with 95% intervals (depth too large to enumerate)";
}

await init();
document.getElementById("st-run").onclick = () => report("ps-out", drawSpaceTime);
document.getElementById("ps-run").onclick = () => report("ps-out", runScan);
document.getElementById("op-run").onclick = () => report("op-out", runOp);
drawSpaceTime();
