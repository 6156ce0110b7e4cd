// Demo page wiring: loads the wasm module and renders the three panels on
// plain canvases. No framework, no external assets.

import init, { build_network, cluster_network, protocol_race } from "./pkg/sfn_wasm.js";

const $ = (id) => document.getElementById(id);

const palette = [
  "#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2",
  "#be185d", "#65a30d", "#9333ea", "#ea580c", "#0d9488", "#b91c1c",
];
const colorFor = (key) => palette[key % palette.length];

function fail(readout, err) {
  readout.innerHTML = `<span class="error">${String(err).replace(/</g, "&lt;")}</span>`;
}

// ---------------------------------------------------------------- panel 1

function drawDistribution(canvas, histogram) {
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  ctx.clearRect(0, 0, W, H);
  const pad = { l: 52, r: 14, t: 12, b: 40 };

  const points = histogram.filter((r) => r.empirical > 0 || r.theoretical > 0);
  if (points.length === 0) return;
  const kMax = Math.max(...points.map((r) => r.k));
  const pVals = points.flatMap((r) => [r.empirical, r.theoretical]).filter((p) => p > 0);
  const pMin = Math.min(...pVals);
  const x = (k) => pad.l + (Math.log10(k) / Math.log10(Math.max(kMax, 10))) * (W - pad.l - pad.r);
  const y = (p) => {
    const lo = Math.log10(pMin), hi = 0;
    return pad.t + ((hi - Math.log10(p)) / (hi - lo)) * (H - pad.t - pad.b);
  };

  // axes and decade gridlines
  ctx.strokeStyle = "#e5e7eb";
  ctx.fillStyle = "#6b7485";
  ctx.font = "11px system-ui";
  ctx.textAlign = "center";
  for (let d = 1; d <= Math.max(kMax, 10); d *= 10) {
    ctx.beginPath(); ctx.moveTo(x(d), pad.t); ctx.lineTo(x(d), H - pad.b); ctx.stroke();
    ctx.fillText(String(d), x(d), H - pad.b + 16);
  }
  ctx.textAlign = "right";
  for (let e = 0; Math.pow(10, -e) >= pMin; e++) {
    const p = Math.pow(10, -e);
    ctx.beginPath(); ctx.moveTo(pad.l, y(p)); ctx.lineTo(W - pad.r, y(p)); ctx.stroke();
    ctx.fillText(`1e-${e}`, pad.l - 6, y(p) + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText("degree k (log)", (pad.l + W - pad.r) / 2, H - 6);

  // theoretical curve
  ctx.strokeStyle = "#1c2330";
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  let started = false;
  for (const r of histogram) {
    if (r.theoretical <= 0) continue;
    const px = x(r.k), py = y(r.theoretical);
    if (!started) { ctx.moveTo(px, py); started = true; } else ctx.lineTo(px, py);
  }
  ctx.stroke();

  // empirical points
  ctx.fillStyle = "#2563eb";
  for (const r of histogram) {
    if (r.empirical <= 0) continue;
    ctx.beginPath();
    ctx.arc(x(r.k), y(r.empirical), 3, 0, Math.PI * 2);
    ctx.fill();
  }

  // legend
  ctx.fillStyle = "#1c2330";
  ctx.textAlign = "left";
  ctx.fillText("— theoretical p(k)", W - 160, pad.t + 12);
  ctx.fillStyle = "#2563eb";
  ctx.fillText("● empirical", W - 160, pad.t + 28);
}

$("build-run").addEventListener("click", () => {
  const readout = $("build-readout");
  try {
    const raw = build_network(
      $("build-mode").value,
      Number($("build-n").value),
      Number($("build-gamma").value),
      Number($("build-iters").value),
      Number($("build-walk").value),
      BigInt($("build-seed").value),
    );
    const data = JSON.parse(raw);
    drawDistribution($("build-plot"), data.histogram);
    readout.innerHTML =
      `trace distance <b>${data.trace_distance.toFixed(4)}</b>, ` +
      `fidelity <b>${data.fidelity.toFixed(4)}</b> — ` +
      `${data.edges} edges, max degree ${data.max_degree}, ` +
      `${data.isolated} isolated nodes`;
  } catch (err) {
    fail(readout, err);
  }
});

// ---------------------------------------------------------------- panel 2

function forceLayout(n, edges, seedPositions) {
  const pos = seedPositions;
  const vel = Array.from({ length: n }, () => [0, 0]);
  const k = Math.sqrt(1 / n) * 0.9;
  for (let iter = 0; iter < 180; iter++) {
    const cool = 0.06 * (1 - iter / 200);
    for (let i = 0; i < n; i++) vel[i] = [0, 0];
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = pos[i][0] - pos[j][0], dy = pos[i][1] - pos[j][1];
        let d2 = dx * dx + dy * dy + 1e-6;
        const f = (k * k) / d2;
        dx *= f; dy *= f;
        vel[i][0] += dx; vel[i][1] += dy;
        vel[j][0] -= dx; vel[j][1] -= dy;
      }
    }
    for (const [a, b] of edges) {
      const i = a - 1, j = b - 1;
      let dx = pos[j][0] - pos[i][0], dy = pos[j][1] - pos[i][1];
      const d = Math.sqrt(dx * dx + dy * dy) + 1e-6;
      const f = (d * d) / k * 0.02;
      dx = (dx / d) * f; dy = (dy / d) * f;
      vel[i][0] += dx; vel[i][1] += dy;
      vel[j][0] -= dx; vel[j][1] -= dy;
    }
    for (let i = 0; i < n; i++) {
      // mild gravity keeps disconnected pieces on screen
      vel[i][0] -= pos[i][0] * 0.05;
      vel[i][1] -= pos[i][1] * 0.05;
      pos[i][0] += vel[i][0] * cool;
      pos[i][1] += vel[i][1] * cool;
    }
  }
  return pos;
}

function drawClusterGraph(canvas, data) {
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  ctx.clearRect(0, 0, W, H);

  // deterministic initial placement on a spiral, then force layout
  const n = data.nodes.length;
  const seedPos = data.nodes.map((_, i) => {
    const a = i * 2.399963;
    const r = 0.04 * Math.sqrt(i + 1);
    return [r * Math.cos(a), r * Math.sin(a)];
  });
  const pos = forceLayout(n, data.edges, seedPos);

  const xs = pos.map((p) => p[0]), ys = pos.map((p) => p[1]);
  const sx = (W - 30) / (Math.max(...xs) - Math.min(...xs) + 1e-9);
  const sy = (H - 30) / (Math.max(...ys) - Math.min(...ys) + 1e-9);
  const s = Math.min(sx, sy);
  const ox = Math.min(...xs), oy = Math.min(...ys);
  const px = (i) => 15 + (pos[i][0] - ox) * s;
  const py = (i) => 15 + (pos[i][1] - oy) * s;

  ctx.strokeStyle = "rgba(100,110,130,0.25)";
  ctx.lineWidth = 0.7;
  for (const [a, b] of data.edges) {
    ctx.beginPath();
    ctx.moveTo(px(a - 1), py(a - 1));
    ctx.lineTo(px(b - 1), py(b - 1));
    ctx.stroke();
  }
  for (const node of data.nodes) {
    const i = node.id - 1;
    ctx.beginPath();
    if (node.cluster == null) {
      ctx.fillStyle = "#c3c9d4"; // unassigned
      ctx.arc(px(i), py(i), 2.4, 0, Math.PI * 2);
    } else {
      ctx.fillStyle = colorFor(node.cluster);
      ctx.arc(px(i), py(i), node.core ? 7 : 3, 0, Math.PI * 2);
    }
    ctx.fill();
    if (node.core) {
      ctx.strokeStyle = "#1c2330";
      ctx.lineWidth = 1.4;
      ctx.stroke();
    }
  }
}

function drawClusterSizes(canvas, sizes) {
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  ctx.clearRect(0, 0, W, H);
  ctx.font = "11px system-ui";
  const sorted = [...sizes].sort((a, b) => b.size - a.size).slice(0, 24);
  const max = Math.max(1, ...sorted.map((s) => s.size));
  const bar = Math.min(26, (H - 40) / sorted.length);
  ctx.fillStyle = "#6b7485";
  ctx.fillText("members per cluster", 10, 16);
  sorted.forEach((entry, i) => {
    const y = 28 + i * bar;
    ctx.fillStyle = colorFor(entry.core);
    ctx.fillRect(58, y, ((W - 110) * entry.size) / max, bar - 4);
    ctx.fillStyle = "#1c2330";
    ctx.textAlign = "right";
    ctx.fillText(`core ${entry.core}`, 54, y + bar / 2 + 2);
    ctx.textAlign = "left";
    ctx.fillText(String(entry.size), 62 + ((W - 110) * entry.size) / max, y + bar / 2 + 2);
  });
}

$("cluster-run").addEventListener("click", () => {
  const readout = $("cluster-readout");
  try {
    const raw = cluster_network(
      $("cluster-mode").value,
      Number($("cluster-n").value),
      Number($("cluster-gamma").value),
      BigInt($("cluster-seed").value),
      Number($("cluster-threshold").value),
      10,
    );
    const data = JSON.parse(raw);
    drawClusterGraph($("cluster-graph"), data);
    drawClusterSizes($("cluster-sizes"), data.sizes);
    const tau = data.tau_end == null ? "" : `, &tau; = ${data.tau_end}`;
    readout.innerHTML =
      `<b>${data.n_cores}</b> cores at threshold ${data.threshold}; ` +
      `${data.isolated} nodes out of reach${tau}. ` +
      `Gray dots never heard from a core.`;
  } catch (err) {
    fail(readout, err);
  }
});

// ---------------------------------------------------------------- panel 3

// Fixed polar layout for the 22-node race fixture: the contested node at
// the center, one chain per core, leaves fanned around their core.
function racePositions() {
  const pos = {};
  const place = (id, angleDeg, r) => {
    const a = (angleDeg * Math.PI) / 180;
    pos[id] = [Math.cos(a) * r, Math.sin(a) * r];
  };
  place(7, 0, 0); // contested
  // chain to core 1 (via 6, 5, 4)
  place(6, 205, 1); place(5, 205, 2); place(4, 205, 3); place(1, 205, 4);
  // chain to core 2 (via 11, 10, 9, 8)
  place(11, 90, 1); place(10, 90, 2); place(9, 90, 3); place(8, 90, 4); place(2, 90, 5);
  // chain to core 3 (via 13, 12)
  place(13, 335, 1); place(12, 335, 2); place(3, 335, 3);
  // leaves
  [[1, [14, 15, 16], 205], [2, [17, 18, 19], 90], [3, [20, 21, 22], 335]].forEach(
    ([core, leaves, angle]) => {
      leaves.forEach((leaf, i) => {
        const spread = (i - 1) * 28;
        const a = ((angle + spread) * Math.PI) / 180;
        pos[leaf] = [pos[core][0] + Math.cos(a) * 0.9, pos[core][1] + Math.sin(a) * 0.9];
      });
    },
  );
  return pos;
}

function drawRace(canvas, data) {
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  ctx.clearRect(0, 0, W, H);
  const pos = racePositions();
  const xs = Object.values(pos).map((p) => p[0]);
  const ys = Object.values(pos).map((p) => p[1]);
  const s = Math.min((W - 60) / (Math.max(...xs) - Math.min(...xs)),
                     (H - 60) / (Math.max(...ys) - Math.min(...ys)));
  const px = (id) => 30 + (pos[id][0] - Math.min(...xs)) * s;
  const py = (id) => 30 + (pos[id][1] - Math.min(...ys)) * s;

  const [sa, sb] = data.slow_link;
  for (const [a, b] of data.edges) {
    const slow = (a === sa && b === sb) || (a === sb && b === sa);
    ctx.strokeStyle = slow ? "#dc2626" : "rgba(100,110,130,0.45)";
    ctx.lineWidth = slow ? 3 : 1;
    ctx.setLineDash(slow ? [6, 4] : []);
    ctx.beginPath();
    ctx.moveTo(px(a), py(a));
    ctx.lineTo(px(b), py(b));
    ctx.stroke();
  }
  ctx.setLineDash([]);

  for (const node of data.nodes) {
    const r = node.core ? 11 : node.contested ? 9 : 5;
    ctx.beginPath();
    ctx.arc(px(node.id), py(node.id), r, 0, Math.PI * 2);
    if (node.core) {
      ctx.fillStyle = colorFor(node.id);
    } else if (node.contested) {
      ctx.fillStyle = data.committed == null ? "#c3c9d4" : colorFor(data.committed);
    } else {
      ctx.fillStyle = "#e2e5ea";
    }
    ctx.fill();
    ctx.strokeStyle = node.contested ? "#1c2330" : "rgba(28,35,48,0.4)";
    ctx.lineWidth = node.contested ? 2.4 : 1;
    ctx.stroke();
  }

  ctx.fillStyle = "#1c2330";
  ctx.font = "12px system-ui";
  ctx.textAlign = "center";
  for (const core of [1, 2, 3]) {
    ctx.fillText(`core ${core}`, px(core), py(core) - 16);
  }
  ctx.fillText("contested", px(7), py(7) - 14);
  ctx.fillStyle = "#dc2626";
  ctx.fillText("slow link", (px(sa) + px(sb)) / 2, (py(sa) + py(sb)) / 2 - 8);
}

function runRace() {
  const readout = $("race-readout");
  try {
    const delay = Number($("race-delay").value);
    const tau = Number($("race-tau").value);
    $("race-delay-label").textContent = delay;
    $("race-tau-label").textContent = tau;
    const data = JSON.parse(protocol_race(delay, tau));
    drawRace($("race-plot"), data);
    const deliveries = data.trace.filter((e) => e.kind === "deliver").length;
    if (data.committed === data.near_core) {
      readout.innerHTML =
        `<span class="outcome-good">Correct:</span> the contested node joined ` +
        `core ${data.committed} at hop ${data.committed_hops} ` +
        `(${deliveries} deliveries). The announcement beat the timeout.`;
    } else {
      readout.innerHTML =
        `<span class="outcome-bad">Suboptimal:</span> the slow link stalled past ` +
        `&tau; = ${tau}, so the node committed to core ${data.committed} at hop ` +
        `${data.committed_hops} instead of core ${data.near_core} at hop 3 ` +
        `(${deliveries} deliveries).`;
    }
  } catch (err) {
    fail(readout, err);
  }
}

$("race-run").addEventListener("click", runRace);
$("race-delay").addEventListener("input", runRace);
$("race-tau").addEventListener("input", runRace);

// ---------------------------------------------------------------- boot

await init();
$("build-run").click();
$("cluster-run").click();
runRace();
