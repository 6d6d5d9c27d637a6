/** Request sequencing: responses that arrive out of order are discarded.
 *
 * Each chart keeps one channel; `issue` stamps a request with the next
 * sequence number and `accept` returns true only when the response belongs
 * to the most recently issued request for that channel.
 */

export class Sequencer {
  private latest = new Map<string, number>();
  private counter = 0;

  issue(channel: string): number {
    const seq = ++this.counter;
    this.latest.set(channel, seq);
    return seq;
  }

  accept(channel: string, seq: number): boolean {
    return this.latest.get(channel) === seq;
  }
}

/** Trailing-edge debounce used for the recompute-on-change workflow. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
  schedule: (cb: () => void, ms: number) => unknown = setTimeout,
  cancel: (handle: unknown) => void = (h) => clearTimeout(h as ReturnType<typeof setTimeout>),
): (...args: A) => void {
  let handle: unknown = null;
  return (...args: A) => {
    if (handle !== null) cancel(handle);
    handle = schedule(() => {
      handle = null;
      fn(...args);
    }, waitMs);
  };
}

export const RECOMPUTE_DEBOUNCE_MS = 250;
