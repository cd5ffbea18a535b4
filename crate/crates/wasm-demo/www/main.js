import init, { chaosMoment, cutoffPath, cutoffRate } from "./pkg/wiener_coupling_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.textContent = String(e.message ?? e);
  }
}

function plot(canvas, series, colors, window) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const all = series.flat();
  const lo = Math.min(...all), hi = Math.max(...all);
  const n = series[0].length - 1;
  const x = (k) => (k / n) * (width - 20) + 10;
  const y = (v) => height - 10 - ((v - lo) / (hi - lo || 1)) * (height - 20);
  ctx.fillStyle = "#eef";
  ctx.fillRect(x(window[0] * n), 0, x(window[1] * n) - x(window[0] * n), height);
  series.forEach((s, j) => {
    ctx.strokeStyle = colors[j];
    ctx.beginPath();
    s.forEach((v, k) => (k ? ctx.lineTo(x(k), y(v)) : ctx.moveTo(x(k), y(v))));
    ctx.stroke();
  });
}

await init();

$("chaos-run").onclick = () =>
  guard($("chaos-out"), () => {
    const [mc, se, exact] = chaosMoment(num("order"), num("r"), num("chaos-paths"), 7n);
    $("chaos-out").textContent =
      `Monte Carlo ${mc.toFixed(5)} ± ${se.toFixed(5)}\nexact       ${exact.toFixed(5)}\n` +
      `deviation   ${((mc - exact) / se).toFixed(2)} standard errors`;
  });

$("path-run").onclick = () =>
  guard($("path-out"), () => {
    const n = 512;
    $("path-out").textContent = "";
    const v = cutoffPath($("path-preset").value, num("a"), num("c"), n, BigInt(num("path-seed")));
    plot($("path-plot"), [Array.from(v.slice(0, n + 1)), Array.from(v.slice(n + 1))], ["#1f4e9c", "#c23b22"], [num("a"), num("c")]);
  });

$("rate-run").onclick = () =>
  guard($("rate-out"), () => {
    const v = cutoffRate($("rate-preset").value, num("rate-paths"), 11n);
    const rows = [];
    for (let i = 0; i < 6; i++) rows.push(`h = ${v[i].toFixed(5)}   ${v[6 + i].toFixed(5)}`);
    rows.push(`slope ${v[12].toFixed(3)} ± ${v[13].toFixed(3)}`);
    $("rate-out").textContent = rows.join("\n");
  });
