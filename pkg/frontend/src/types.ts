// Wire shapes of the aggregator REST API.

export type Level = "file" | "event";
export type PredOp = "eq" | "lt" | "le" | "gt" | "ge" | "between";

export const PRED_OPS: PredOp[] = ["eq", "lt", "le", "gt", "ge", "between"];

export interface PredicateJson {
  attr: string;
  op: PredOp;
  lo: number;
  hi: number | null;
}

/** A query exactly as POST /api/v1/queries accepts it. Time bounds are
 * u64 nanoseconds, which exceed Number's exact-integer range, so they are
 * BigInt here and serialized as bare JSON integers. */
export interface QueryJson {
  level: Level;
  time_range: { from_ns: bigint; to_ns: bigint } | null;
  predicates: PredicateJson[];
  sources: number[] | null;
  limit: number | null;
}

export interface ManifestEntry {
  source_name: string;
  path: string;
  event_count: number;
  size: number | null;
  sha256: string | null;
}

export interface Manifest {
  collection_id: string;
  level: Level;
  query: unknown;
  created_at_ns: number;
  entries: ManifestEntry[];
}

export interface SourceStats {
  source_id: number;
  source_name: string;
  adapter_url: string;
  ingest: { files: number; events: number; skipped: number };
  cache: { hits: number; misses: number; bytes_fetched: number; evictions: number };
}

export function isMaterialized(entry: ManifestEntry): boolean {
  return entry.size !== null && entry.sha256 !== null;
}
