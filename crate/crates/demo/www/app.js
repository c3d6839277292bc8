import init, { emulate, phase_flow, compare } from "./pkg/lpu_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

const num = (id) => Number(document.getElementById(id).value);
const str = (id) => document.getElementById(id).value;

// Residual curves on a log y axis. series: [{ name, points: [[x, y], ...] }]
function plot(canvasId, series, xLabel) {
  const c = document.getElementById(canvasId);
  const ctx = c.getContext("2d");
  const pad = { l: 60, r: 150, t: 10, b: 30 };
  const w = c.width - pad.l - pad.r;
  const h = c.height - pad.t - pad.b;
  ctx.clearRect(0, 0, c.width, c.height);

  const pts = series.flatMap((s) => s.points).filter(([, y]) => y > 0 && isFinite(y));
  if (pts.length === 0) return;
  const xMax = Math.max(1, ...pts.map(([x]) => x));
  let lo = Math.floor(Math.log10(Math.min(...pts.map(([, y]) => y))));
  let hi = Math.ceil(Math.log10(Math.max(...pts.map(([, y]) => y))));
  if (hi === lo) hi += 1;
  const sx = (x) => pad.l + (x / xMax) * w;
  const sy = (y) => pad.t + ((hi - Math.log10(y)) / (hi - lo)) * h;

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.strokeRect(pad.l, pad.t, w, h);
  for (let e = lo; e <= hi; e++) {
    ctx.fillText(`1e${e}`, 8, sy(10 ** e) + 4);
  }
  ctx.fillText("0", pad.l, c.height - 10);
  ctx.fillText(`${xMax} ${xLabel}`, pad.l + w - 80, c.height - 10);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    let started = false;
    for (const [x, y] of s.points) {
      if (!(y > 0)) continue;
      if (started) ctx.lineTo(sx(x), sy(y));
      else ctx.moveTo(sx(x), sy(y));
      started = true;
    }
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.name, pad.l + w + 10, pad.t + 14 + 16 * i);
  });
}

function guard(outId, fn) {
  const out = document.getElementById(outId);
  out.classList.remove("err");
  try {
    fn(out);
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
  }
}

function runEmulate() {
  guard("em-out", (out) => {
    const r = JSON.parse(emulate(num("em-n"), num("em-bw"), num("em-seed"), str("em-mode"), num("em-beta")));
    plot("em-plot", [{ name: r.mode, points: r.trace }], "roundtrips");
    out.textContent =
      `converged: ${r.converged}\nroundtrips: ${r.roundtrips}\nmodel time: ${r.time_ns} ns\n` +
      `restarts: ${r.restarts}, final β: ${r.final_beta}\nresidual: ${r.final_residual.toExponential(3)}`;
  });
}

function runFlow() {
  guard("fl-out", (out) => {
    const r = JSON.parse(phase_flow(num("fl-n"), num("fl-bw"), num("fl-seed"), num("fl-steps")));
    const idx = (v) => v.map((y, i) => [i + 1, y]);
    plot("fl-plot", [
      { name: "laser phases", points: idx(r.laser) },
      { name: "Richardson", points: idx(r.richardson) },
    ], "roundtrips");
    out.textContent = `ω = ${r.omega.toPrecision(6)}\nlargest |x_laser - x_richardson|: ${r.max_difference.toExponential(3)}`;
  });
}

function runCompare() {
  guard("cm-out", (out) => {
    const rows = JSON.parse(compare(num("cm-n"), num("cm-bw"), num("cm-seed"), num("cm-tol")));
    plot("cm-plot", rows.map((r) => ({ name: r.solver, points: r.history })), "steps");
    out.textContent = rows
      .map((r) => `${r.solver.padEnd(18)} converged: ${String(r.converged).padEnd(6)} steps: ${String(r.steps).padEnd(8)} residual: ${r.residual.toExponential(3)}`)
      .join("\n") + "\n(steps are iterations for the digital solvers and roundtrips for the emulator)";
  });
}

await init();
document.getElementById("em-run").onclick = runEmulate;
document.getElementById("fl-run").onclick = runFlow;
document.getElementById("cm-run").onclick = runCompare;
runEmulate();
