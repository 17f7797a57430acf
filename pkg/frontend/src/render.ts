// Pure HTML renderers: given server payloads, produce the view markup.
// Numbers are rendered with String(...) so what the user sees is exactly what
// the API returned; bar widths and color buckets are style only.

import type {
  AppState,
  FieldRow,
} from "./state.js";
import { canGenerate, currentMissingKey, formValid, wizardStepCount } from "./state.js";
import type {
  Candidate,
  DocumentView,
  EvaluationView,
  PurchaseItem,
  RefineView,
  SessionView,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function num(value: number): string {
  return String(value);
}

function bar(value: number, max = 1): string {
  const width = Math.max(0, Math.min(100, (value / max) * 100));
  return `<span class="bar"><span class="bar-fill" style="width:${width}%"></span></span>`;
}

const MISSING_MARKER = /\[MISSING:([A-Za-z0-9_.]+)\]/g;

export function highlightMarkers(escaped: string): string {
  return escaped.replace(MISSING_MARKER, '<mark class="missing">[MISSING:$1]</mark>');
}

// --- requirement form -------------------------------------------------------

export function renderForm(rows: FieldRow[], items: PurchaseItem[]): string {
  const fieldRows = rows
    .map(
      (row, i) => `
      <div class="field-row" data-row="${i}">
        <input class="field-name" data-row="${i}" placeholder="field name" value="${escapeHtml(row.name)}">
        <input class="field-value" data-row="${i}" placeholder="value" value="${escapeHtml(row.value)}">
        <button class="remove-field" data-row="${i}" type="button">x</button>
      </div>`,
    )
    .join("");
  const itemRows = items
    .map(
      (item, i) => `
      <tr data-item="${i}">
        <td><input class="item-name" data-item="${i}" value="${escapeHtml(item.name)}"></td>
        <td><input class="item-quantity" data-item="${i}" value="${item.quantity ?? ""}"></td>
        <td><input class="item-unit" data-item="${i}" value="${escapeHtml(item.unit ?? "")}"></td>
        <td><button class="remove-item" data-item="${i}" type="button">x</button></td>
      </tr>`,
    )
    .join("");
  const disabled = formValid(rows) ? "" : "disabled";
  return `
  <section id="requirement-form">
    <h2>New requirement</h2>
    <div id="field-rows">${fieldRows}</div>
    <button id="add-field" type="button">Add field</button>
    <h3>Purchase list</h3>
    <table class="item-editor">
      <thead><tr><th>name</th><th>quantity</th><th>unit</th><th></th></tr></thead>
      <tbody>${itemRows}</tbody>
    </table>
    <button id="add-item" type="button">Add item</button>
    <button id="submit-requirement" type="button" ${disabled}>Find templates</button>
  </section>`;
}

// --- candidate list ----------------------------------------------------------

export function renderCandidates(candidates: Candidate[]): string {
  if (candidates.length === 0) {
    return `<section id="candidates"><p>No candidates.</p></section>`;
  }
  const hasListDist = candidates.some((c) => c.list_dist !== null);
  const rows = candidates
    .map((c) => {
      const fields = Object.entries(c.field_scores)
        .map(
          ([name, fs]) => `
          <div class="field-score">
            <span class="field-score-name">${escapeHtml(name)}</span>
            emb <span class="score-embedding">${num(fs.embedding)}</span> ${bar(fs.embedding)}
            voc <span class="score-vocabulary">${num(fs.vocabulary)}</span> ${bar(fs.vocabulary)}
          </div>`,
        )
        .join("");
      const listCell = hasListDist
        ? `<td class="list-dist">${c.list_dist ? num(c.list_dist.value) : ""}</td>`
        : "";
      return `
      <tr data-doc="${escapeHtml(c.doc_id)}">
        <td class="doc-id">${escapeHtml(c.doc_id)}</td>
        <td class="d-score">${num(c.d_score)}</td>
        <td>${fields}</td>
        ${listCell}
        <td><button class="pick-template" data-doc="${escapeHtml(c.doc_id)}" type="button">Use as template</button></td>
      </tr>`;
    })
    .join("");
  const listHeader = hasListDist ? "<th>list dist</th>" : "";
  return `
  <section id="candidates">
    <h2>Template candidates</h2>
    <table>
      <thead><tr><th>document</th><th>score</th><th>per-field</th>${listHeader}<th></th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </section>`;
}

// --- missing-information wizard ------------------------------------------------

export function renderWizard(session: SessionView, force: boolean): string {
  const steps = wizardStepCount(session);
  const key = currentMissingKey(session);
  const prompt =
    key === null
      ? `<p class="all-info">All information collected.</p>`
      : `
      <div class="wizard-step">
        <label>Missing: <code class="missing-key">${escapeHtml(key)}</code></label>
        <input id="answer-value" placeholder="value for ${escapeHtml(key)}">
        <button id="submit-answer" data-key="${escapeHtml(key)}" type="button">Answer</button>
      </div>`;
  const transcript = session.transcript
    .map(
      ([role, text]) =>
        `<li class="turn turn-${escapeHtml(role)}"><b>${escapeHtml(role)}</b>: ${escapeHtml(text)}</li>`,
    )
    .join("");
  const generateDisabled = canGenerate(session, force) ? "" : "disabled";
  return `
  <section id="wizard" data-state="${session.state}" data-steps="${steps}">
    <h2>Session ${escapeHtml(session.session_id)} (${escapeHtml(session.state)})</h2>
    <p class="steps-left">${steps} step(s) remaining</p>
    ${prompt}
    <label><input type="checkbox" id="force-generate" ${force ? "checked" : ""}> fill missing keys with markers</label>
    <button id="generate" type="button" ${generateDisabled}>Generate</button>
    <h3>Transcript</h3>
    <ul id="transcript">${transcript}</ul>
  </section>`;
}

// --- document preview ------------------------------------------------------------

function renderTable(table: { field_names: string[]; rows: string[][] }, cls = ""): string {
  const head = table.field_names.map((n) => `<th>${escapeHtml(n)}</th>`).join("");
  const body = table.rows
    .map((row) => `<tr>${row.map((c) => `<td>${highlightMarkers(escapeHtml(c))}</td>`).join("")}</tr>`)
    .join("");
  return `<table class="doc-table ${cls}"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderDocumentPane(doc: DocumentView, heading: string): string {
  const paragraphs = doc.paragraphs
    .map((p) => `<p class="doc-paragraph">${highlightMarkers(escapeHtml(p))}</p>`)
    .join("");
  const tables = doc.tables.map((t) => renderTable(t)).join("");
  const items = doc.purchase_items
    .map((i) => `<li>${escapeHtml(i.name)}${i.quantity != null ? ` (${i.quantity}${i.unit ? " " + escapeHtml(i.unit) : ""})` : ""}</li>`)
    .join("");
  return `
  <article class="document-pane">
    <h3>${escapeHtml(heading)}: ${escapeHtml(doc.id)}</h3>
    ${paragraphs}
    ${tables}
    <h4>Purchase items</h4>
    <ul class="purchase-items">${items}</ul>
  </article>`;
}

export function renderPreview(
  doc: DocumentView,
  gold: DocumentView | null,
  refine: RefineView | null,
): string {
  const goldPane = gold ? renderDocumentPane(gold, "Gold") : "";
  const refineBlock = refine ? renderRefine(refine) : "";
  return `
  <section id="preview" class="${gold ? "side-by-side" : ""}">
    <h2>Generated document</h2>
    <div class="panes">
      ${renderDocumentPane(doc, "Generated")}
      ${goldPane}
    </div>
    ${refineBlock}
    <div class="actions">
      <button id="refine" type="button">Refine purchase list</button>
      <input id="gold-id" placeholder="gold document id">
      <button id="evaluate" type="button">Evaluate</button>
    </div>
  </section>`;
}

export function renderRefine(refine: RefineView): string {
  const dropped = refine.dropped
    .map(
      (d) => `
      <li class="dropped-item">
        <span class="dropped-name">${escapeHtml(d.item.name)}</span>
        dist <span class="dropped-dist">${num(d.dist)}</span>
        vs theta <span class="theta">${num(refine.theta)}</span>
        (closest: ${escapeHtml(d.best_match)})
      </li>`,
    )
    .join("");
  const warnings = refine.warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return `
  <div id="refine-report" data-source="${escapeHtml(refine.source)}">
    <h3>Refinement (${escapeHtml(refine.source)})</h3>
    <p>${refine.dropped.length} item(s) dropped</p>
    <ul class="dropped">${dropped}</ul>
    <ul class="refine-warnings">${warnings}</ul>
  </div>`;
}

// --- evaluation ---------------------------------------------------------------------

function gauge(label: string, value: number): string {
  return `
  <div class="gauge" data-label="${escapeHtml(label)}">
    <span class="gauge-label">${escapeHtml(label)}</span>
    <span class="gauge-value">${num(value)}</span>
    ${bar(value, 100)}
  </div>`;
}

function similarityClass(value: number): string {
  // style bucket only; the exact value is rendered alongside
  if (value >= 0.9) return "sim-high";
  if (value >= 0.6) return "sim-mid";
  return "sim-low";
}

export function renderEvaluation(report: EvaluationView, gen: DocumentView | null): string {
  const perParagraph = report.per_paragraph
    .map(
      (v, i) =>
        `<li class="${similarityClass(v)}">paragraph ${i}: <span class="para-sim">${num(v)}</span></li>`,
    )
    .join("");
  const perTable = report.per_table
    .map((v, i) => {
      const matched = report.table_matching[String(i)];
      const table = gen?.tables[i];
      const rendered = table ? renderTable(table, similarityClass(v)) : "";
      return `
      <div class="table-eval ${similarityClass(v)}">
        table ${i} score <span class="table-sim">${num(v)}</span>
        ${matched !== undefined ? `(matched gold table ${matched})` : "(unmatched)"}
        ${rendered}
      </div>`;
    })
    .join("");
  return `
  <section id="evaluation">
    <h2>Evaluation</h2>
    <div class="gauges">
      ${gauge("paragraph score", report.para_score)}
      ${gauge("table score", report.table_score)}
      ${gauge("overall score", report.score)}
    </div>
    <h3>Per paragraph</h3>
    <ul class="per-paragraph">${perParagraph}</ul>
    <h3>Per table</h3>
    ${perTable}
  </section>`;
}

// --- shell ------------------------------------------------------------------------

export function renderApp(state: AppState): string {
  const error = state.error ? `<div id="error" role="alert">${escapeHtml(state.error)}</div>` : "";
  let body = "";
  switch (state.step) {
    case "form":
      body = renderForm(state.fieldRows, state.items);
      break;
    case "candidates":
      body = renderForm(state.fieldRows, state.items) + renderCandidates(state.candidates);
      break;
    case "wizard":
      body = state.session ? renderWizard(state.session, state.forceGenerate) : "";
      break;
    case "preview":
      body = state.document
        ? renderPreview(state.document, state.gold, state.refineResult)
        : "";
      break;
    case "evaluation":
      body =
        (state.document ? renderPreview(state.document, state.gold, state.refineResult) : "") +
        (state.evaluation ? renderEvaluation(state.evaluation, state.document) : "");
      break;
  }
  return `${error}${body}`;
}
