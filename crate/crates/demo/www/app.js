import init, { rouge, summarize_texts, gates } from "./pkg/rasum_demo.js";

const $ = (id) => document.getElementById(id);
let lastGates = [];

function bar(label, value, max, text, chosen) {
  const row = document.createElement("div");
  row.className = chosen ? "bar chosen" : "bar";
  const num = document.createElement("span");
  num.textContent = label;
  const track = document.createElement("div");
  track.className = "track";
  const fill = document.createElement("div");
  fill.className = "fill";
  fill.style.width = `${max > 0 ? (100 * value) / max : 0}%`;
  track.append(fill);
  const t = document.createElement("span");
  t.textContent = text;
  row.append(num, track, t);
  return row;
}

function runSummary() {
  $("status").textContent = "training…";
  // let the status paint before the blocking call
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const out = JSON.parse(summarize_texts(
        $("news").value, $("comments").value,
        Number($("limit").value), Number($("seed").value), $("use-comments").checked));
      $("summary").textContent = out.summary;
      $("aspects").replaceChildren(...out.aspects.map((terms) => {
        const li = document.createElement("li");
        li.textContent = terms.slice(0, 8).join(", ");
        return li;
      }));
      const max = Math.max(...out.sentences.map((s) => s.score));
      $("salience").replaceChildren(...out.sentences.map((s) =>
        bar(s.score.toFixed(3), s.score, max, `${s.doc}:${s.index} ${s.text}`, s.in_summary)));
      lastGates = out.gates;
      $("lambda").value = out.lambda_p;
      renderGates();
      $("status").textContent = `done in ${Math.round(performance.now() - t0)} ms`;
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  }, 10);
}

function renderGates() {
  const lambda = Number($("lambda").value);
  $("lambda-value").textContent = lambda.toFixed(2);
  if (lastGates.length === 0) {
    $("gates").textContent = "Run a summary with comments to see the gates.";
    return;
  }
  const rho = gates(
    Float64Array.from(lastGates.map((g) => g.rho_z)),
    Float64Array.from(lastGates.map((g) => g.rho_x)),
    lambda);
  $("gates").replaceChildren(...lastGates.map((g, i) => bar(rho[i].toFixed(3), rho[i], 1, g.text, false)));
}

function runRouge() {
  const body = $("rouge").tBodies[0];
  try {
    const scores = JSON.parse(rouge($("candidate").value, $("references").value, $("stem").checked));
    body.replaceChildren(...scores.map((s) => {
      const tr = document.createElement("tr");
      for (const v of [s.metric, s.precision.toFixed(4), s.recall.toFixed(4), s.f.toFixed(4)]) {
        const td = document.createElement("td");
        td.textContent = v;
        tr.append(td);
      }
      return tr;
    }));
  } catch (e) {
    body.replaceChildren();
    const tr = body.insertRow();
    tr.insertCell().textContent = String(e.message ?? e);
  }
}

await init();
$("run").addEventListener("click", runSummary);
$("lambda").addEventListener("input", renderGates);
for (const id of ["candidate", "references", "stem"]) $(id).addEventListener("input", runRouge);
renderGates();
runRouge();
runSummary();
