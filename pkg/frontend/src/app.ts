// DOM wiring. All decision logic lives in form.ts / tree.ts / canonical.ts;
// this file only moves values between inputs and those modules.

import { ApiClient, ApiError } from "./api.js";
import { buildQuery, emptyForm, PredicateRow, QueryFormState, validateForm } from "./form.js";
import { buildTree, TreeNode } from "./tree.js";
import { isMaterialized, Manifest, PredOp, PRED_OPS } from "./types.js";

const api = new ApiClient("");
const form: QueryFormState = emptyForm("event");
let requestSeq = 0; // last-write-wins rendering guard

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

// -- form rendering -----------------------------------------------------------

function renderErrors() {
  const errors = validateForm(form);
  document.querySelectorAll(".field-error").forEach((n) => (n.textContent = ""));
  for (const err of errors) {
    const slot = document.querySelector(`[data-error-for="${err.field}"]`);
    if (slot) slot.textContent = err.message;
  }
  ($("submit") as HTMLButtonElement).disabled = errors.length > 0;
}

function bindInput(input: HTMLInputElement | HTMLSelectElement, apply: (v: string) => void) {
  input.addEventListener("input", () => {
    apply(input.value);
    renderErrors();
  });
}

function predicateRowView(row: PredicateRow, index: number): HTMLElement {
  const attr = el("input", {
    placeholder: "attribute (e.g. energy_tev)", value: row.attr,
  }) as HTMLInputElement;
  bindInput(attr, (v) => (row.attr = v));

  const op = el("select") as HTMLSelectElement;
  for (const candidate of PRED_OPS) {
    op.append(el("option", { value: candidate }, candidate));
  }
  op.value = row.op;
  const lo = el("input", { placeholder: "lo", value: row.lo }) as HTMLInputElement;
  const hi = el("input", { placeholder: "hi", value: row.hi }) as HTMLInputElement;
  hi.style.display = row.op === "between" ? "" : "none";
  bindInput(lo, (v) => (row.lo = v));
  bindInput(hi, (v) => (row.hi = v));
  bindInput(op, (v) => {
    row.op = v as PredOp;
    if (row.op !== "between") row.hi = "";
    renderForm();
  });

  const remove = el("button", { type: "button", class: "link" }, "remove");
  remove.addEventListener("click", () => {
    form.predicates.splice(index, 1);
    renderForm();
  });

  return el("div", { class: "predicate-row" },
    attr, op, lo, hi, remove,
    el("span", { class: "field-error", "data-error-for": `predicates[${index}].attr` }),
    el("span", { class: "field-error", "data-error-for": `predicates[${index}].op` }),
    el("span", { class: "field-error", "data-error-for": `predicates[${index}].lo` }),
    el("span", { class: "field-error", "data-error-for": `predicates[${index}].hi` }),
  );
}

function renderForm() {
  const rows = $("predicate-rows");
  rows.replaceChildren(...form.predicates.map(predicateRowView));
  $("time-fields").style.display = form.timeEnabled ? "" : "none";
  renderErrors();
}

async function renderSources() {
  const box = $("source-boxes");
  try {
    const sources = await api.sources();
    box.replaceChildren(...sources.map((s) => {
      const cb = el("input", { type: "checkbox", value: String(s.source_id) }) as HTMLInputElement;
      cb.checked = form.selectedSources.includes(s.source_id);
      cb.addEventListener("change", () => {
        form.selectedSources = cb.checked
          ? [...form.selectedSources, s.source_id]
          : form.selectedSources.filter((id) => id !== s.source_id);
        renderErrors();
      });
      return el("label", { class: "source" }, cb,
        ` ${s.source_name} (#${s.source_id}, ${s.ingest.files} files)`);
    }));
  } catch (e) {
    box.replaceChildren(el("span", { class: "muted" }, `sources unavailable: ${e}`));
  }
}

// -- results ------------------------------------------------------------------

function entryView(node: TreeNode, collectionId: string): HTMLElement {
  const entry = node.entry!;
  const link = el("a", { href: api.fileUrl(collectionId, entry.path) }, node.name);
  const meta: (Node | string)[] = [` ${entry.event_count} events`];
  if (isMaterialized(entry)) {
    meta.push(el("span", { class: "muted" },
      ` · ${entry.size} bytes · ${entry.sha256!.slice(0, 12)}…`));
  } else {
    meta.push(el("span", { class: "badge" }, "not yet materialized"));
  }
  return el("div", { class: "file" }, link, ...meta);
}

function treeView(node: TreeNode, collectionId: string): HTMLElement {
  if (node.kind === "file") return entryView(node, collectionId);
  const details = el("details", { open: "" },
    el("summary", {}, `${node.name}/ `,
      el("span", { class: "muted" },
        `${node.fileCount} files, ${node.eventTotal} events`)),
  ) as HTMLDetailsElement;
  const children = el("div", { class: "children" },
    ...node.children.map((c) => treeView(c, collectionId)));
  details.append(children);
  return details;
}

function renderManifest(manifest: Manifest) {
  const roots = buildTree(manifest.entries);
  const refresh = el("button", { type: "button" }, "refresh manifest");
  refresh.addEventListener("click", () => loadManifest(manifest.collection_id));
  $("results").replaceChildren(
    el("h2", {}, `collection ${manifest.collection_id.slice(0, 16)}…`),
    el("p", { class: "muted" },
      `level=${manifest.level} · ${manifest.entries.length} entries · `
      + `query ${JSON.stringify(manifest.query)}`),
    refresh,
    manifest.entries.length === 0
      ? el("p", { class: "empty" }, "0 matches")
      : el("div", { class: "tree" },
          ...roots.map((r) => treeView(r, manifest.collection_id))),
  );
}

function renderError(message: string, retry: () => void) {
  const button = el("button", { type: "button" }, "retry");
  button.addEventListener("click", retry);
  $("results").replaceChildren(
    el("div", { class: "error" }, `request failed: ${message} `, button));
}

async function loadManifest(collectionId: string) {
  const seq = ++requestSeq;
  try {
    const manifest = await api.getManifest(collectionId);
    if (seq === requestSeq) renderManifest(manifest);
  } catch (e) {
    if (seq === requestSeq) {
      renderError(e instanceof ApiError ? e.message : String(e),
        () => loadManifest(collectionId));
    }
  }
}

async function submit() {
  const seq = ++requestSeq;
  $("results").replaceChildren(el("p", { class: "muted" }, "querying…"));
  try {
    const query = buildQuery(form);
    const created = await api.postQuery(query);
    const manifest = await api.getManifest(created.collection_id);
    if (seq === requestSeq) renderManifest(manifest);
  } catch (e) {
    if (seq === requestSeq) {
      renderError(e instanceof ApiError ? e.message : String(e), submit);
    }
  }
}

// -- bootstrap ------------------------------------------------------------------

export function start() {
  const level = $("level") as HTMLSelectElement;
  level.value = form.level;
  bindInput(level, (v) => (form.level = v as "file" | "event"));

  const timeEnabled = $("time-enabled") as HTMLInputElement;
  timeEnabled.addEventListener("change", () => {
    form.timeEnabled = timeEnabled.checked;
    renderForm();
  });
  bindInput($("time-from") as HTMLInputElement, (v) => (form.timeFromIso = v));
  bindInput($("time-to") as HTMLInputElement, (v) => (form.timeToIso = v));

  const sourcesEnabled = $("sources-enabled") as HTMLInputElement;
  sourcesEnabled.addEventListener("change", () => {
    form.sourcesEnabled = sourcesEnabled.checked;
    renderErrors();
  });
  bindInput($("limit") as HTMLInputElement, (v) => (form.limit = v));

  $("add-predicate").addEventListener("click", () => {
    form.predicates.push({ attr: "", op: "between", lo: "", hi: "" });
    renderForm();
  });
  $("submit").addEventListener("click", (ev) => {
    ev.preventDefault();
    submit();
  });

  renderForm();
  renderSources();
}

if (typeof document !== "undefined" && document.getElementById("query-form")) {
  start();
}
