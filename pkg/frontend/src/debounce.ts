/** Debouncing and latest-only request sequencing for live previews. */

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), delayMs);
  };
}

/**
 * Runs async jobs so that only the newest one's result is delivered: each
 * launch aborts the previous request, and a response belonging to a
 * superseded launch is dropped even if it arrives late.
 */
export class LatestOnly<T> {
  private seq = 0;
  private controller: AbortController | null = null;

  async run(
    job: (signal: AbortSignal) => Promise<T>,
    deliver: (value: T) => void,
    onError?: (err: unknown) => void,
  ): Promise<void> {
    const ticket = ++this.seq;
    this.controller?.abort();
    this.controller = new AbortController();
    try {
      const value = await job(this.controller.signal);
      if (ticket === this.seq) deliver(value);
    } catch (err) {
      if (ticket !== this.seq) return; // superseded: stale failures are noise
      if (err instanceof DOMException && err.name === "AbortError") return;
      onError?.(err);
    }
  }
}
