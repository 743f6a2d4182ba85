import init, { parse, tag, mix } from "./pkg/sectionmt_web.js";

const $ = (id) => document.getElementById(id);
const nums = (s) => s.split(",").map((x) => x.trim()).filter((x) => x !== "").map(Number);

const SAMPLE = `Elle naît dans une famille de musiciens et passe son enfance au village. Sa mère et son père élèvent cinq enfants.
== Carrière ==
Elle chante à l'opéra de Lyon. Elle enregistre un album de chansons avec un orchestre. Son concert au théâtre attire un large public.`;

function escape(s) {
  return s.replace(/[&<>]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;" })[c]);
}

function showParse() {
  const r = JSON.parse(parse($("raw").value, $("lang").value));
  if (r.error) return ($("parse-out").textContent = r.error);
  $("parse-out").textContent = r.sections
    .map((s) => `[${s.index}] ${s.heading || "(lead)"}\n` + s.sentences.map((x) => "  " + x).join("\n"))
    .join("\n");
}

function showTags() {
  const r = JSON.parse(
    tag($("raw").value, $("lang").value, +$("k").value, +$("alpha").value, +$("iters").value,
        +$("seed").value, $("doc").checked, $("train").checked)
  );
  if (r.error) return ($("tag-out").textContent = r.error);
  const lines = r.sentences
    .map((s) => `<div class="t${s.topic % 5}">§${s.section} ${escape(s.text)}</div>`)
    .join("");
  const topics = r.topics.map((t) => `<li>&lt;topic${t.topic}&gt;: ${escape(t.top_words.join(", "))}</li>`).join("");
  const warn = r.warnings.length ? `<p>${escape(r.warnings.join("; "))}</p>` : "";
  $("tag-out").innerHTML = lines + `<ul>${topics}</ul>` + warn;
}

function showMix() {
  $("gate-val").textContent = $("gate").value;
  const ids = nums($("ids").value);
  const r = JSON.parse(
    mix(new Float64Array(nums($("pnmt").value)), new Float64Array(nums($("scores").value)),
        new Uint32Array(ids), +$("gate").value)
  );
  if (r.error) return ($("mix-out").textContent = r.error);
  const rows = r.mixed
    .map((p, w) => {
      const c = ids.indexOf(w);
      const pc = c >= 0 ? r.p_cache[c].toFixed(3) : "";
      return `<tr><td>${w}</td><td>${r.p_nmt[w].toFixed(3)}</td><td>${pc}</td><td>${p.toFixed(3)}</td>` +
        `<td style="text-align:left"><span class="bar" style="width:${(p * 200).toFixed(0)}px"></span></td></tr>`;
    })
    .join("");
  $("mix-out").innerHTML =
    `<p>g = ${r.gate.toFixed(3)}, total = ${r.sum.toFixed(6)}</p>` +
    `<table><tr><th>word</th><th>base</th><th>cache</th><th>mixed</th><th></th></tr>${rows}</table>`;
}

await init();
$("raw").value = SAMPLE;
$("parse").onclick = showParse;
$("tag").onclick = showTags;
for (const id of ["pnmt", "ids", "scores", "gate"]) $(id).oninput = showMix;
showParse();
showMix();
