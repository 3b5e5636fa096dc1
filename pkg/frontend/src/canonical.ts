// Canonical query serialization, byte-identical to the server's.
//
// The server canonicalizes queries as key-sorted, whitespace-free JSON with
// absent optionals as explicit nulls and predicate operands as floats, then
// derives collection ids as sha256(canonical ‖ ":" ‖ generation). To predict
// ids (and to prove UI/CLI parity) this module reproduces those bytes
// exactly, including the server's float spelling ("2.0", not "2").

import { QueryJson } from "./types.js";

/** Server-side float repr: shortest round-trip decimal, integral values
 * spelled with a trailing ".0", scientific notation outside
 * [1e-4, 1e16) with a sign and at least two exponent digits. */
export function floatRepr(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite operand: ${x}`);
  if (x === 0) return Object.is(x, -0) ? "-0.0" : "0.0";
  const abs = Math.abs(x);
  if (abs >= 1e16 || abs < 1e-4) {
    return x
      .toExponential()
      .replace(/e([+-])(\d)$/, "e$10$2"); // pad exponent to two digits
  }
  const s = String(x);
  return s.includes(".") || s.includes("e") ? s : s + ".0";
}

function str(s: string): string {
  return JSON.stringify(s); // attrs/levels are ASCII identifiers: no escaping drift
}

/** Emit the canonical text for a query. Hand-rolled (not JSON.stringify)
 * so BigInt time bounds stay exact and floats match the server. */
export function canonicalQuery(q: QueryJson): string {
  const parts: string[] = [];
  parts.push(`"level":${str(q.level)}`);
  parts.push(`"limit":${q.limit === null ? "null" : String(q.limit)}`);
  const preds = q.predicates.map(
    (p) =>
      `{"attr":${str(p.attr)},"hi":${p.op === "between" && p.hi !== null ? floatRepr(p.hi) : "null"},` +
      `"lo":${floatRepr(p.lo)},"op":${str(p.op)}}`,
  );
  parts.push(`"predicates":[${preds.join(",")}]`);
  const sources =
    q.sources === null
      ? "null"
      : `[${[...new Set(q.sources)].sort((a, b) => a - b).join(",")}]`;
  parts.push(`"sources":${sources}`);
  const tr =
    q.time_range === null
      ? "null"
      : `{"from_ns":${q.time_range.from_ns},"to_ns":${q.time_range.to_ns}}`;
  parts.push(`"time_range":${tr}`);
  return `{${parts.join(",")}}`;
}

/** Request body for POST /api/v1/queries: same bytes as the canonical form
 * (which the server accepts verbatim). */
export function queryRequestBody(q: QueryJson): string {
  return canonicalQuery(q);
}

/** Content-derived collection id: sha256(canonical ‖ ":" ‖ generation). */
export async function collectionId(canonical: string, generation: number | bigint): Promise<string> {
  const payload = new TextEncoder().encode(`${canonical}:${generation}`);
  const digest = await crypto.subtle.digest("SHA-256", payload);
  return [...new Uint8Array(digest)].map((b) => b.toString(16).padStart(2, "0")).join("");
}
