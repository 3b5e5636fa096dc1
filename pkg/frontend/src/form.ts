// Query form model: raw input state, per-field validation, and the
// translation to/from the wire query. The submit button stays disabled
// while any row is invalid; building a query from an invalid form throws.

import { Level, PredOp, PredicateJson, QueryJson, PRED_OPS } from "./types.js";
import { isoToNs, nsToIso } from "./timens.js";

export interface PredicateRow {
  attr: string;
  op: PredOp;
  lo: string; // raw inputs; empty string = not filled in
  hi: string;
}

export interface QueryFormState {
  level: Level;
  timeEnabled: boolean;
  timeFromIso: string;
  timeToIso: string;
  predicates: PredicateRow[];
  sourcesEnabled: boolean;
  selectedSources: number[];
  limit: string; // empty = no limit
}

export interface FieldError {
  field: string; // "time.from", "predicates[2].lo", "limit", ...
  message: string;
}

export function emptyForm(level: Level = "file"): QueryFormState {
  return {
    level,
    timeEnabled: false,
    timeFromIso: "",
    timeToIso: "",
    predicates: [],
    sourcesEnabled: false,
    selectedSources: [],
    limit: "",
  };
}

const ATTR_RE = /^[a-z_][a-z0-9_]*$/;

function parseOperand(text: string): number | null {
  const trimmed = text.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

export function validateForm(form: QueryFormState): FieldError[] {
  const errors: FieldError[] = [];
  if (form.level !== "file" && form.level !== "event") {
    errors.push({ field: "level", message: "level must be file or event" });
  }
  if (form.timeEnabled) {
    const from = isoToNs(form.timeFromIso);
    const to = isoToNs(form.timeToIso);
    if (from === null) {
      errors.push({ field: "time.from", message: "not a valid UTC ISO timestamp" });
    }
    if (to === null) {
      errors.push({ field: "time.to", message: "not a valid UTC ISO timestamp" });
    }
    if (from !== null && to !== null && from > to) {
      errors.push({ field: "time.from", message: "start must not be after end" });
    }
  }
  form.predicates.forEach((row, i) => {
    const at = (part: string) => `predicates[${i}].${part}`;
    if (!ATTR_RE.test(row.attr)) {
      errors.push({ field: at("attr"), message: "attribute name must be an identifier" });
    }
    if (!PRED_OPS.includes(row.op)) {
      errors.push({ field: at("op"), message: `unknown operator ${row.op}` });
      return;
    }
    const lo = parseOperand(row.lo);
    if (lo === null) {
      errors.push({ field: at("lo"), message: "a finite number is required" });
    }
    if (row.op === "between") {
      const hi = parseOperand(row.hi);
      if (hi === null) {
        errors.push({ field: at("hi"), message: "between needs an upper bound" });
      } else if (lo !== null && lo > hi) {
        errors.push({ field: at("hi"), message: "lower bound exceeds upper bound" });
      }
    } else if (row.hi.trim() !== "") {
      errors.push({ field: at("hi"), message: `${row.op} takes a single operand` });
    }
  });
  if (form.sourcesEnabled && form.selectedSources.length === 0) {
    errors.push({ field: "sources", message: "select at least one source" });
  }
  if (form.limit.trim() !== "") {
    const limit = Number(form.limit.trim());
    if (!Number.isInteger(limit) || limit < 0) {
      errors.push({ field: "limit", message: "limit must be a non-negative integer" });
    }
  }
  return errors;
}

export function canSubmit(form: QueryFormState): boolean {
  return validateForm(form).length === 0;
}

/** Form -> wire query. Throws unless the form validates: there is no
 * partial submission. */
export function buildQuery(form: QueryFormState): QueryJson {
  const errors = validateForm(form);
  if (errors.length > 0) {
    throw new Error(`form is invalid: ${errors[0]!.field}: ${errors[0]!.message}`);
  }
  const time_range = form.timeEnabled
    ? { from_ns: isoToNs(form.timeFromIso)!, to_ns: isoToNs(form.timeToIso)! }
    : null;
  const predicates: PredicateJson[] = form.predicates.map((row) => ({
    attr: row.attr,
    op: row.op,
    lo: Number(row.lo.trim()),
    hi: row.op === "between" ? Number(row.hi.trim()) : null,
  }));
  return {
    level: form.level,
    time_range,
    predicates,
    sources: form.sourcesEnabled
      ? [...new Set(form.selectedSources)].sort((a, b) => a - b)
      : null,
    limit: form.limit.trim() === "" ? null : Number(form.limit.trim()),
  };
}

/** Wire query -> form state (the round-trip direction, used to repopulate
 * the form from a manifest's canonical query). */
export function formStateFromQuery(q: QueryJson): QueryFormState {
  return {
    level: q.level,
    timeEnabled: q.time_range !== null,
    timeFromIso: q.time_range ? nsToIso(q.time_range.from_ns) : "",
    timeToIso: q.time_range ? nsToIso(q.time_range.to_ns) : "",
    predicates: q.predicates.map((p) => ({
      attr: p.attr,
      op: p.op,
      lo: String(p.lo),
      hi: p.op === "between" && p.hi !== null ? String(p.hi) : "",
    })),
    sourcesEnabled: q.sources !== null,
    selectedSources: q.sources ? [...q.sources] : [],
    limit: q.limit === null ? "" : String(q.limit),
  };
}

/** Parse a canonical query object (as found in manifest JSON, where time
 * bounds may arrive as numbers or strings) into a QueryJson. */
export function queryFromCanonicalObj(obj: any): QueryJson {
  return {
    level: obj.level,
    time_range:
      obj.time_range === null
        ? null
        : {
            from_ns: BigInt(obj.time_range.from_ns),
            to_ns: BigInt(obj.time_range.to_ns),
          },
    predicates: (obj.predicates ?? []).map((p: any) => ({
      attr: p.attr,
      op: p.op,
      lo: Number(p.lo),
      hi: p.hi === null || p.hi === undefined ? null : Number(p.hi),
    })),
    sources: obj.sources === null ? null : [...obj.sources],
    limit: obj.limit === null ? null : Number(obj.limit),
  };
}
