import { ApiClient, ApiError } from "./api";
import type { ItemView, Session } from "./types";

/** Supplies answers for one item; a UI or a script can implement it. */
export interface Responder {
  /** Milliseconds spent on the reading screen before opening answers. */
  readingMs(item: ItemView): number;
  /** Milliseconds spent answering before submit. */
  answeringMs(item: ItemView): number;
  /** One selected option index (displayed order) per question. */
  answers(item: ItemView): number[];
  /** Subset of the item's keyword candidates. */
  keywords(item: ItemView): string[];
  /** Difficulty rating, 1-5. */
  difficulty(item: ItemView): number;
}

/** Monotonic millisecond clock; injectable so tests control timing. */
export interface Clock {
  now(): number;
  advance(ms: number): void;
}

export function wallClock(): Clock {
  let last = 0;
  let offset = 0;
  return {
    now() {
      // strictly monotonic even if the wall clock steps backwards
      const t = Date.now() + offset;
      last = Math.max(last, t);
      return last;
    },
    advance(ms: number) {
      offset += ms;
    },
  };
}

/**
 * Drive a session to completion: next_item -> reading -> questions ->
 * submit, looping until done. Exactly one timestamp per screen
 * transition, in the order text_shown -> answers_opened ->
 * answers_submitted, strictly increasing across items.
 *
 * Submits are idempotent per item index: after a network failure the
 * runner re-reads the server cursor and treats an already-advanced
 * cursor as a recorded submission.
 */
export class SessionRunner {
  constructor(
    private readonly client: ApiClient,
    private readonly clock: Clock = wallClock(),
  ) {}

  async run(
    participantId: string,
    seed: number | undefined,
    responder: Responder,
  ): Promise<Session> {
    const session = await this.client.createSession(participantId, seed);
    for (;;) {
      const next = await this.client.nextItem(session.session_id);
      if (next.done) {
        return this.client.getSession(session.session_id);
      }
      await this.runItem(session.session_id, next, responder);
    }
  }

  private async runItem(
    sessionId: string,
    item: ItemView,
    responder: Responder,
  ): Promise<void> {
    const shownAt = this.clock.now();
    this.clock.advance(Math.max(1, responder.readingMs(item)));
    const openedAt = this.clock.now();
    this.clock.advance(Math.max(1, responder.answeringMs(item)));
    const submittedAt = this.clock.now();
    this.clock.advance(1);
    const submission = {
      index: item.index,
      mcq: responder.answers(item),
      keywords: responder.keywords(item),
      difficulty: responder.difficulty(item),
      text_shown_at: shownAt,
      answers_opened_at: openedAt,
      answers_submitted_at: submittedAt,
    };
    try {
      await this.client.submit(sessionId, submission);
    } catch (error) {
      if (error instanceof ApiError) {
        throw error;
      }
      // network failure: the request may or may not have landed
      const session = await this.client.getSession(sessionId);
      if (session.cursor <= item.index) {
        await this.client.submit(sessionId, submission);
      }
    }
  }
}
