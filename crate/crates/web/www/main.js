import init, { packingTrace, softmaxCurve, matroidEpochs } from "./pkg/drsub_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function frame(canvas, pad = 30) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  return { ctx, x: (u) => pad + u * w, y: (v) => pad + h - v * h };
}

function polyline(f, xs, ys, color, dash = []) {
  f.ctx.strokeStyle = color;
  f.ctx.setLineDash(dash);
  f.ctx.beginPath();
  xs.forEach((u, i) => (i ? f.ctx.lineTo(f.x(u), f.y(ys[i])) : f.ctx.moveTo(f.x(u), f.y(ys[i]))));
  f.ctx.stroke();
  f.ctx.setLineDash([]);
}

function runPacking() {
  const r = JSON.parse(packingTrace(num("c1"), num("c2"), num("a11"), num("a12"), num("a21"), num("a22"), num("p-eps"), num("p-guess")));
  const out = $("packing-out");
  if (r.error) {
    out.textContent = r.error;
    return;
  }
  const f = frame($("packing"));
  // constraint lines a_i1 x1 + a_i2 x2 = 1 clipped to the unit square
  const rows = [[num("a11"), num("a12")], [num("a21"), num("a22")]];
  for (const [a, b] of rows) {
    const xs = [], ys = [];
    for (let k = 0; k <= 100; k++) {
      const u = k / 100;
      const v = b > 0 ? (1 - a * u) / b : u <= 1 / a ? 1 : 0;
      if (v >= 0 && v <= 1) { xs.push(u); ys.push(v); }
    }
    polyline(f, xs, ys, "#c44", [4, 3]);
  }
  polyline(f, r.points.map((p) => p[0]), r.points.map((p) => p[1]), "#236");
  const last = r.points[r.points.length - 1];
  f.ctx.fillStyle = "#236";
  f.ctx.beginPath();
  f.ctx.arc(f.x(last[0]), f.y(last[1]), 4, 0, 2 * Math.PI);
  f.ctx.fill();
  out.textContent =
    `termination ${r.termination}, guess ${r.guess.toFixed(4)}, value ${r.value.toFixed(4)}, grid optimum ${r.optimum.toFixed(4)}\n` +
    `iterations ${r.iterations}, max row load ${r.max_load.toFixed(4)}`;
}

function runSoftmax() {
  const r = JSON.parse(softmaxCurve(num("s-eta"), Math.max(1, Math.round(num("s-m"))), num("s-z"), 201));
  if (r.error) return;
  const top = Math.max(...r.upper);
  const f = frame($("softmax"));
  polyline(f, r.t, r.max.map((v) => v / top), "#999");
  polyline(f, r.t, r.upper.map((v) => v / top), "#999", [4, 3]);
  polyline(f, r.t, r.smax.map((v) => v / top), "#236");
}

function runMatroid() {
  const r = JSON.parse(matroidEpochs(Math.round(num("m-n")), Math.round(num("m-k")), Math.round(num("m-seed")), num("m-eps"), 0));
  const out = $("matroid-out");
  if (r.error) {
    out.textContent = r.error;
    return;
  }
  const f = frame($("matroid"));
  const top = Math.max(r.best_set_value, ...r.epoch_values) || 1;
  const J = r.epoch_values.length;
  f.ctx.fillStyle = "#8ab";
  r.epoch_values.forEach((v, j) => {
    const x0 = f.x(j / J), x1 = f.x((j + 0.8) / J);
    f.ctx.fillRect(x0, f.y(v / top), x1 - x0, f.y(0) - f.y(v / top));
  });
  polyline(f, [0, 1], [r.best_set_value / top, r.best_set_value / top], "#c44", [4, 3]);
  out.textContent =
    `termination ${r.termination}, guess ${r.guess.toFixed(4)}, value ${r.value.toFixed(4)}, ` +
    `best set ${r.best_set_value.toFixed(4)}, ratio ${(r.value / r.best_set_value).toFixed(3)}\n` +
    `x = [${r.solution.map((v) => v.toFixed(3)).join(", ")}]`;
}

await init();
$("p-run").onclick = runPacking;
$("m-run").onclick = runMatroid;
for (const id of ["s-eta", "s-m", "s-z"]) $(id).oninput = runSoftmax;
runPacking();
runSoftmax();
runMatroid();
