// Controller: owns the last server snapshot and the transient UI state,
// exposes the three user actions, re-renders through a callback. Mutations
// are single-flight and never retried automatically; failures become
// inline notices.

import { ApiClient } from "./api.js";
import { buildViewModel, type ViewModel } from "./model.js";
import type { StateJson } from "./types.js";

export class Console {
  private state: StateJson | null = null;
  private notice: string | null = null;
  private inFlight = false;
  private lastEventSeq = -1;

  constructor(
    private readonly api: ApiClient,
    private readonly onRender: (vm: ViewModel) => void,
  ) {}

  get snapshot(): StateJson | null {
    return this.state;
  }

  private render(): void {
    if (this.state) {
      this.onRender(
        buildViewModel(this.state, { notice: this.notice, inFlight: this.inFlight }),
      );
    }
  }

  async refresh(): Promise<void> {
    const res = await this.api.getState();
    if (res.ok && res.body) {
      this.state = res.body;
    } else {
      this.notice = `state unavailable: ${res.detail}`;
    }
    this.render();
  }

  async step(index: number): Promise<void> {
    if (this.inFlight || this.state?.stage === "closed") {
      return;
    }
    this.inFlight = true;
    this.notice = null;
    this.render();
    const res = await this.api.step(index);
    this.inFlight = false;
    if (res.ok && res.body) {
      this.state = res.body; // the response is the fresh snapshot
    } else {
      this.notice = `step ${index} rejected (${res.status}): ${res.detail}`;
    }
    this.render();
  }

  async exitCampaign(confirmed: boolean): Promise<void> {
    if (!confirmed || this.inFlight) {
      return;
    }
    const res = await this.api.exit();
    if (res.ok && res.body) {
      this.state = res.body;
    } else {
      this.notice = `exit rejected (${res.status}): ${res.detail}`;
    }
    this.render();
  }

  /** One polling turn: when new events exist, re-fetch the state. */
  async pollEvents(wait = 0): Promise<boolean> {
    const res = await this.api.events(this.lastEventSeq, wait);
    if (!res.ok || !res.body || res.body.events.length === 0) {
      return false;
    }
    this.lastEventSeq = res.body.next;
    await this.refresh();
    return true;
  }
}
