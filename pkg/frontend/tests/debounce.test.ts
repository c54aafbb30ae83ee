import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce, LatestOnly } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once after the quiet period with the last arguments", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 150);
    fn(1);
    vi.advanceTimersByTime(100);
    fn(2);
    vi.advanceTimersByTime(100);
    fn(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([3]);
  });

  it("fires again for activity after the quiet period", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 150);
    fn(1);
    vi.advanceTimersByTime(200);
    fn(2);
    vi.advanceTimersByTime(200);
    expect(calls).toEqual([1, 2]);
  });
});

describe("LatestOnly", () => {
  it("drops a stale response that resolves after a newer request", async () => {
    const gate = new LatestOnly<string>();
    const delivered: string[] = [];
    let releaseFirst!: (v: string) => void;
    const first = gate.run(
      () => new Promise<string>((res) => (releaseFirst = res)),
      (v) => delivered.push(v),
    );
    const second = gate.run(
      () => Promise.resolve("new"),
      (v) => delivered.push(v),
    );
    await second;
    releaseFirst("old");
    await first;
    expect(delivered).toEqual(["new"]);
  });

  it("ignores abort errors and reports real failures of the newest job", async () => {
    const gate = new LatestOnly<string>();
    const errors: unknown[] = [];
    await gate.run(
      () => Promise.reject(new Error("server down")),
      () => {},
      (e) => errors.push(e),
    );
    expect(errors).toHaveLength(1);
    expect(String(errors[0])).toContain("server down");
  });

  it("aborts the previous in-flight request's signal", async () => {
    const gate = new LatestOnly<string>();
    let firstSignal: AbortSignal | undefined;
    const first = gate.run(
      (signal) =>
        new Promise<string>((_res, rej) => {
          firstSignal = signal;
          signal.addEventListener("abort", () =>
            rej(new DOMException("aborted", "AbortError")),
          );
        }),
      () => {},
      () => {
        throw new Error("stale abort must not surface");
      },
    );
    await gate.run(() => Promise.resolve("x"), () => {});
    await first;
    expect(firstSignal?.aborted).toBe(true);
  });
});
