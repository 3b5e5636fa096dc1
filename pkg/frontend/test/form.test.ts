import { describe, expect, it } from "vitest";

import { canonicalQuery } from "../src/canonical.js";
import {
  buildQuery,
  canSubmit,
  emptyForm,
  formStateFromQuery,
  queryFromCanonicalObj,
  validateForm,
} from "../src/form.js";
import { isoToNs, nsToIso } from "../src/timens.js";

describe("validateForm", () => {
  it("accepts an empty form (match-all)", () => {
    expect(validateForm(emptyForm("file"))).toEqual([]);
    expect(canSubmit(emptyForm("event"))).toBe(true);
  });

  it("flags between with lo > hi and disables submit", () => {
    const form = emptyForm("event");
    form.predicates.push({ attr: "energy_tev", op: "between", lo: "3.5", hi: "1.5" });
    const errors = validateForm(form);
    expect(errors).toHaveLength(1);
    expect(errors[0]!.field).toBe("predicates[0].hi");
    expect(canSubmit(form)).toBe(false);
    expect(() => buildQuery(form)).toThrow(/invalid/);
  });

  it("flags missing operands, bad attrs, bad ops per field", () => {
    const form = emptyForm("event");
    form.predicates.push({ attr: "9bad", op: "ge", lo: "", hi: "" });
    const fields = validateForm(form).map((e) => e.field);
    expect(fields).toContain("predicates[0].attr");
    expect(fields).toContain("predicates[0].lo");
  });

  it("rejects a second operand for single-operand operators", () => {
    const form = emptyForm("event");
    form.predicates.push({ attr: "quality", op: "ge", lo: "1", hi: "2" });
    expect(validateForm(form)[0]!.field).toBe("predicates[0].hi");
  });

  it("validates the time range as strict UTC ISO", () => {
    const form = emptyForm("file");
    form.timeEnabled = true;
    form.timeFromIso = "2020-02-30T00:00:00Z"; // rolls over: rejected
    form.timeToIso = "not a date";
    const fields = validateForm(form).map((e) => e.field);
    expect(fields).toEqual(["time.from", "time.to"]);
    form.timeFromIso = "2020-09-14T00:00:00Z";
    form.timeToIso = "2020-09-13T00:00:00Z";
    expect(validateForm(form)[0]!.message).toMatch(/after/);
  });

  it("requires a selection once sources are restricted", () => {
    const form = emptyForm("file");
    form.sourcesEnabled = true;
    expect(validateForm(form)[0]!.field).toBe("sources");
    form.selectedSources = [1];
    expect(validateForm(form)).toEqual([]);
  });

  it("requires a non-negative integer limit", () => {
    const form = emptyForm("file");
    form.limit = "-1";
    expect(validateForm(form)).toHaveLength(1);
    form.limit = "2.5";
    expect(validateForm(form)).toHaveLength(1);
    form.limit = "10";
    expect(validateForm(form)).toEqual([]);
  });
});

describe("buildQuery", () => {
  it("builds a match-all file query from an empty form", () => {
    expect(buildQuery(emptyForm("file"))).toEqual({
      level: "file", time_range: null, predicates: [], sources: null, limit: null,
    });
  });

  it("transmits timestamps as exact integer nanoseconds", () => {
    const form = emptyForm("event");
    form.timeEnabled = true;
    form.timeFromIso = "2020-09-13T12:26:40.123456789Z";
    form.timeToIso = "2020-09-13T12:26:41.000000001Z";
    const q = buildQuery(form);
    expect(q.time_range).toEqual({
      from_ns: 1600000000123456789n,
      to_ns: 1600000001000000001n,
    });
  });
});

describe("round-trips", () => {
  it("form -> query -> form is stable where it matters", () => {
    const form = emptyForm("event");
    form.timeEnabled = true;
    form.timeFromIso = "2020-09-13T12:26:40.000000000Z";
    form.timeToIso = "2020-09-14T00:00:00.000000000Z";
    form.predicates.push({ attr: "energy_tev", op: "between", lo: "1.5", hi: "3.5" });
    form.sourcesEnabled = true;
    form.selectedSources = [2, 1];
    form.limit = "10";
    const q = buildQuery(form);
    const back = formStateFromQuery(q);
    expect(buildQuery(back)).toEqual(q);
    expect(canonicalQuery(buildQuery(back))).toBe(canonicalQuery(q));
  });

  it("canonical query objects from manifests repopulate the form", () => {
    const obj = {
      level: "event",
      limit: null,
      predicates: [{ attr: "quality", op: "ge", lo: 1.0, hi: null }],
      sources: [1, 2],
      time_range: { from_ns: 1600000000000000000, to_ns: 1600041600000000000 },
    };
    const q = queryFromCanonicalObj(obj);
    const form = formStateFromQuery(q);
    expect(form.timeFromIso).toBe("2020-09-13T12:26:40.000000000Z");
    expect(canonicalQuery(buildQuery(form))).toBe(canonicalQuery(q));
  });
});

describe("timens", () => {
  it("round-trips arbitrary nanosecond values", () => {
    for (const ns of [0n, 1n, 999999999n, 1600000000123456789n, 4102444800000000000n]) {
      expect(isoToNs(nsToIso(ns))).toBe(ns);
    }
  });

  it("rejects rollover, non-UTC and out-of-range values", () => {
    expect(isoToNs("2021-02-29T00:00:00Z")).toBeNull();
    expect(isoToNs("2020-09-13 12:00:00Z")).toBeNull();
    expect(isoToNs("2020-09-13T12:00:00+02:00")).toBeNull();
    expect(isoToNs("99999-01-01T00:00:00Z")).toBeNull();
  });
});
