import init, { centerMap, pressureCurve, criteria } from "./pkg/da_thermo_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).concat(opts.extraY ?? []);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const pad = 30;
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  if (y0 < 0 && y1 > 0) { ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0)); }
  if (x0 < 0 && x1 > 0) { ctx.moveTo(px(0), pad); ctx.lineTo(px(0), h - pad); }
  ctx.stroke();
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#444";
  ctx.fillText(`x ∈ [${x0.toPrecision(3)}, ${x1.toPrecision(3)}]`, pad, h - 8);
  ctx.fillText(`y ∈ [${y0.toPrecision(3)}, ${y1.toPrecision(3)}]`, pad, 14);
  for (const m of opts.marks ?? []) {
    ctx.fillStyle = "#c33";
    ctx.beginPath();
    ctx.arc(px(m), py(0), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function guarded(out, f) {
  return () => {
    out.classList.remove("err");
    try {
      f();
    } catch (e) {
      out.classList.add("err");
      out.textContent = String(e);
    }
  };
}

function drawCenter() {
  const r = JSON.parse(centerMap(num("cm-lc"), num("cm-rho"), num("cm-frac")));
  plot($("cm-plot"), [
    { x: r.c, y: r.c.map((c, i) => r.g[i] - c), color: "#06c" },
  ], { marks: r.fixed_points });
  $("cm-out").textContent =
    `displacement g(c) − c; red marks are fixed points\n` +
    `λ_c at q = ${r.lambda_c.toFixed(6)}   far-field slope = ${r.lambda_ca.toFixed(6)}\n` +
    `R_c = ${r.r_c.toExponential(4)}   γ = ${r.gamma.toFixed(6)}   θ(r=0.1) = ${r.theta_r?.toFixed(6)}\n` +
    `fixed points: ${r.fixed_points.map((c) => c.toExponential(4)).join(", ")}`;
}

function drawPressure() {
  const r = JSON.parse(pressureCurve($("pc-deformed").checked, num("pc-lc"), num("pc-count")));
  plot($("pc-plot"), [
    { x: r.t, y: r.p, color: "#06c" },
    { x: r.t, y: r.lower, color: "#06c", dash: [4, 4] },
  ], { marks: r.root == null ? [] : [r.root] });
  $("pc-out").textContent =
    `h = log λ_u = ${r.h.toFixed(6)}\n` +
    r.t.map((t, i) => `t = ${t.toFixed(2)}   P = ${r.p[i].toFixed(5)}`).join("\n") +
    `\nroot: ${r.root == null ? "not bracketed" : r.root.toFixed(5)}`;
}

function evalCriteria() {
  const r = JSON.parse(criteria(
    num("cr-r"), num("cr-rho"), num("cr-l"),
    num("cr-supb"), num("cr-sup"), num("cr-inf"), num("cr-v"), num("cr-tau"),
  ));
  $("cr-out").textContent = [
    `Ψ            ${r.psi}`,
    `D(r)         ${r.d_of_r}`,
    `bounded-range ${r.bounded_range}`,
    ...r.notes.map((n) => `  note: ${n}`),
    `T(ρ, r)      ${r.threshold_t}`,
    `Δ            ${r.delta_gap}  (log ${r.delta_gap_ln})`,
  ].join("\n");
}

await init();
$("cm-go").onclick = guarded($("cm-out"), drawCenter);
$("pc-go").onclick = guarded($("pc-out"), drawPressure);
$("cr-go").onclick = guarded($("cr-out"), evalCriteria);
$("cm-go").click();
$("cr-go").click();
