/** Wire types for the session service HTTP+JSON API. */

export interface Span {
  start: number;
  end: number;
  weight: "regular" | "bold";
  color: string;
}

export interface AssignmentItem {
  text_id: string;
  condition: "S" | "NS";
}

export interface Session {
  session_id: string;
  participant_id: string;
  seed: number;
  status: "active" | "complete" | "abandoned";
  cursor: number;
  items: AssignmentItem[];
}

export interface Question {
  kind: string;
  prompt: string;
  options: string[];
}

export interface ItemView {
  done: false;
  index: number;
  position: number;
  text_id: string;
  condition: "S" | "NS";
  text: string;
  spans: Span[];
  questions: Question[];
  keywords: string[];
}

export interface SessionDone {
  done: true;
}

export type NextItem = ItemView | SessionDone;

export interface Submission {
  index: number;
  mcq: number[];
  keywords: string[];
  difficulty: number;
  text_shown_at: number;
  answers_opened_at: number;
  answers_submitted_at: number;
}

export interface SubmitResult {
  cursor: number;
  status: string;
}

export interface ExportedSession {
  v: number;
  participant_id: string;
  status: string;
  items: unknown[];
}
