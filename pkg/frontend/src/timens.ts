// ISO-8601 display <-> integer nanoseconds.
//
// Timestamps are edited as UTC ISO strings with up to 9 fractional digits
// and transmitted as u64 nanosecond integers; BigInt end to end so the
// browser never rounds them through a double.

const ISO_RE =
  /^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,9}))?Z$/;

export const U64_MAX = 18446744073709551615n;
const NS_PER_SEC = 1_000_000_000n;

export function nsToIso(ns: bigint): string {
  if (ns < 0n || ns > U64_MAX) throw new Error(`timestamp out of u64 range: ${ns}`);
  const seconds = ns / NS_PER_SEC;
  const frac = ns % NS_PER_SEC;
  const head = new Date(Number(seconds) * 1000).toISOString().slice(0, 19);
  return `${head}.${frac.toString().padStart(9, "0")}Z`;
}

/** Parse a strict UTC ISO timestamp; null when malformed or when the
 * calendar fields are out of range (no silent rollover of e.g. month 13). */
export function isoToNs(text: string): bigint | null {
  const m = ISO_RE.exec(text.trim());
  if (!m) return null;
  const [, y, mo, d, hh, mm, ss, fracRaw] = m;
  const ms = Date.UTC(
    Number(y), Number(mo) - 1, Number(d), Number(hh), Number(mm), Number(ss),
  );
  if (!Number.isFinite(ms) || ms < 0) return null;
  const frac = BigInt((fracRaw ?? "").padEnd(9, "0") || "0");
  const ns = BigInt(ms) * 1_000_000n + frac;
  if (ns > U64_MAX) return null;
  // round-trip check rejects rolled-over dates like 2020-02-30
  return nsToIso(ns) === normalizeIso(text.trim()) ? ns : null;
}

function normalizeIso(text: string): string {
  const m = ISO_RE.exec(text);
  if (!m) return text;
  const frac = (m[7] ?? "").padEnd(9, "0") || "000000000";
  return `${m[1]}-${m[2]}-${m[3]}T${m[4]}:${m[5]}:${m[6]}.${frac}Z`;
}
