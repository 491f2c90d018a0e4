import init, { landing_heatmap, evaluate_position, dice_posterior } from "./pkg/monolab_web.js";

const $ = (id) => document.getElementById(id);

function board() {
  return $("board").value === "custom" ? $("board-json").value : $("board").value;
}

function fail(id, e) {
  $(id).textContent = String(e);
}

function numbers(text) {
  return text.split(",").map((s) => s.trim()).filter((s) => s.length).map(Number);
}

function shade(p, max) {
  const t = max > 0 ? p / max : 0;
  const light = Math.round(100 - 55 * t);
  return `hsl(10, 80%, ${light}%)`;
}

function drawHeatmap() {
  $("heatmap-err").textContent = "";
  $("turns-out").textContent = $("turns").value;
  let data;
  try {
    data = JSON.parse(landing_heatmap(board(), Number($("start").value), Number($("turns").value)));
  } catch (e) {
    $("heatmap").textContent = "";
    return fail("heatmap-err", e);
  }
  const probs = $("cumulative").checked ? data.visits : data.rows[data.rows.length - 1];
  const max = Math.max(...probs);
  const perRow = Math.min(10, probs.length);
  let html = "<table>";
  for (let i = 0; i < probs.length; i += perRow) {
    html += "<tr>";
    for (let j = i; j < Math.min(i + perRow, probs.length); j++) {
      const edge = data.colors[j] ? `border-top: 5px solid ${data.colors[j]}` : "";
      html += `<td class="cell" style="background:${shade(probs[j], max)};${edge}" title="${data.names[j]}">`
        + `${j} ${data.names[j].slice(0, 12)}<br><b>${probs[j].toFixed(3)}</b></td>`;
    }
    html += "</tr>";
  }
  $("heatmap").innerHTML = html + "</table>";
}

function parsePosition() {
  const players = $("players").value.trim().split("\n").filter((l) => l.trim()).map((l) => {
    const [position, cash] = l.split(":").map(Number);
    return { position, cash };
  });
  const holdings = $("holdings").value.trim().split("\n").filter((l) => l.trim()).map((l) => {
    const parts = l.trim().split(":");
    return {
      square: Number(parts[0]),
      owner: Number(parts[1]),
      level: parts[2] && parts[2] !== "m" ? Number(parts[2]) : 0,
      mortgaged: parts.includes("m"),
    };
  });
  return JSON.stringify({ players, holdings });
}

function evaluate() {
  $("values-err").textContent = "";
  let rows;
  try {
    rows = JSON.parse(evaluate_position(board(), parsePosition()));
  } catch (e) {
    $("values").textContent = "";
    return fail("values-err", e);
  }
  const cols = ["assets", "short_term", "long_term", "monopoly", "total"];
  let html = "<table><tr><th>player</th>" + cols.map((c) => `<th>${c}</th>`).join("") + "</tr>";
  for (const r of rows) {
    html += `<tr><td>${r.player}</td>` + cols.map((c) => `<td>${r[c].toFixed(1)}</td>`).join("") + "</tr>";
  }
  $("values").innerHTML = html + "</table>";
}

function posterior() {
  $("posterior-err").textContent = "";
  let d;
  try {
    d = JSON.parse(dice_posterior(
      JSON.stringify(numbers($("faces").value)),
      JSON.stringify(numbers($("weights").value)),
      JSON.stringify(numbers($("rolls").value)),
    ));
  } catch (e) {
    $("posterior").textContent = "";
    return fail("posterior-err", e);
  }
  let html = "<table><tr><th>face</th><th>alpha</th><th>MAP</th><th>expected</th><th></th></tr>";
  d.faces.forEach((f, i) => {
    const unseen = d.unseen_faces.includes(f) ? " (new)" : "";
    html += `<tr><td>${f}${unseen}</td><td>${d.alpha[i]}</td><td>${d.map[i].toFixed(3)}</td>`
      + `<td>${d.expected[i].toFixed(3)}</td><td style="text-align:left">`
      + `<span class="bar" style="width:${200 * d.map[i]}px"></span><br>`
      + `<span class="bar expected" style="width:${200 * d.expected[i]}px"></span></td></tr>`;
  });
  html += "</table>";
  const kl = d.kl === null ? "infinite (new face)" : `${d.kl.toFixed(4)} nats`;
  $("posterior").innerHTML = html + `<p>${d.rolls} rolls, KL(MAP || expected) = ${kl}</p>`;
}

await init();

$("board").addEventListener("change", () => {
  $("board-json").hidden = $("board").value !== "custom";
  drawHeatmap();
});
$("board-json").addEventListener("change", drawHeatmap);
for (const id of ["start", "turns", "cumulative"]) {
  $(id).addEventListener("input", drawHeatmap);
}
$("evaluate").addEventListener("click", evaluate);
for (const id of ["faces", "weights", "rolls"]) {
  $(id).addEventListener("input", posterior);
}
$("roll6").addEventListener("click", () => {
  const v = $("rolls").value.trim();
  $("rolls").value = v ? `${v},6` : "6";
  posterior();
});

drawHeatmap();
evaluate();
posterior();
