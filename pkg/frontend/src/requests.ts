/**
 * Debounced rank requests with monotonic ids and latest-wins delivery.
 *
 * Slider drags schedule requests; only the trailing edge of a burst is sent,
 * and a response is delivered only if no newer request has been issued since
 * (out-of-order completions of superseded requests are dropped).
 */

import type { RankRequestBody, RankResponse } from "./types";

export type SendFn = (body: RankRequestBody) => Promise<RankResponse>;

export interface RequesterCallbacks {
  onResult: (response: RankResponse, requestId: number) => void;
  onError: (error: unknown, requestId: number) => void;
  /** Fired when a request is scheduled or issued: current list is stale. */
  onPending?: () => void;
}

export class RankRequester {
  private nextId = 0;
  private latestIssued = -1;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: SendFn,
    private readonly callbacks: RequesterCallbacks,
    private readonly debounceMs = 200,
  ) {}

  /** Debounced entry point for slider/toggle changes. */
  schedule(body: RankRequestBody): void {
    this.callbacks.onPending?.();
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issue(body);
    }, this.debounceMs);
  }

  /** Immediate issue (user/preset selection); still latest-wins. */
  async issue(body: RankRequestBody): Promise<void> {
    const requestId = this.nextId++;
    this.latestIssued = requestId;
    this.callbacks.onPending?.();
    try {
      const response = await this.send(body);
      if (requestId === this.latestIssued) {
        this.callbacks.onResult(response, requestId);
      }
    } catch (error) {
      if (requestId === this.latestIssued) {
        this.callbacks.onError(error, requestId);
      }
    }
  }
}
