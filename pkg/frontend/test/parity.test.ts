// UI/CLI parity: form states fed through the web form's query builder must
// produce byte-identical canonical query JSON, and therefore identical
// collection ids, to what the service/CLI derives. The fixture is written
// by scripts/make_parity_fixtures.py using the Python implementation.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { canonicalQuery, collectionId } from "../src/canonical.js";
import { buildQuery, QueryFormState, validateForm } from "../src/form.js";

interface ParityCase {
  name: string;
  form: QueryFormState;
  canonical: string;
  ids: Record<string, string>;
}

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/parity.json", import.meta.url), "utf-8"),
) as { generations: number[]; cases: ParityCase[] };

describe("UI/CLI parity over the fixed query set", () => {
  it("has the expected number of cases", () => {
    expect(fixture.cases.length).toBe(10);
  });

  for (const parityCase of fixture.cases) {
    it(`canonical bytes match: ${parityCase.name}`, () => {
      expect(validateForm(parityCase.form)).toEqual([]);
      const query = buildQuery(parityCase.form);
      expect(canonicalQuery(query)).toBe(parityCase.canonical);
    });

    it(`collection ids match: ${parityCase.name}`, async () => {
      const canonical = canonicalQuery(buildQuery(parityCase.form));
      for (const generation of fixture.generations) {
        expect(await collectionId(canonical, generation)).toBe(
          parityCase.ids[String(generation)],
        );
      }
    });
  }
});
