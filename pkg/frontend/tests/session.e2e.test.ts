// @vitest-environment node
//
// End-to-end: drive full 10-item sessions over HTTP against the real
// service, then validate the exported logs with the analysis toolchain
// as an external oracle (subprocess), keeping the app itself HTTP-only.
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { SessionRunner, type Clock, type Responder } from "../src/session";
import type { ItemView } from "../src/types";

const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workDir = "";

function python(args: string[], input?: string) {
  const result = spawnSync("python3", args, {
    input,
    encoding: "utf-8",
    timeout: 120_000,
  });
  if (result.status !== 0) {
    throw new Error(`python3 ${args[0]} failed:\n${result.stderr}`);
  }
  return result.stdout;
}

async function waitForHealthz(client: ApiClient): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const health = await client.healthz();
      if (health.status === "ok") return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "seglit-webui-"));
  python([
    "-m", "seglit.cli", "fixtures",
    "--out", workDir, "--participants", "2", "--seed", "3",
  ]);
  server = spawn(
    "python3",
    [
      "-m", "seglit.cli", "serve",
      "--docs", join(workDir, "documents.jsonl"),
      "--bank", join(workDir, "bank.json"),
      "--data-dir", join(workDir, "data"),
      "--port", String(PORT),
    ],
    { stdio: "ignore" },
  );
  await waitForHealthz(new ApiClient(BASE));
});

afterAll(() => {
  server?.kill();
});

/** Deterministic virtual clock: ~100s reading, ~60s answering. */
function scriptedClock(): Clock {
  let now = 1_000;
  return {
    now: () => now,
    advance: (ms: number) => {
      now += ms;
    },
  };
}

function scriptedResponder(): Responder {
  return {
    readingMs: () => 100_000,
    answeringMs: () => 60_000,
    answers: (item: ItemView) => item.questions.map((_, qi) => qi % 4),
    keywords: (item: ItemView) => item.keywords.slice(0, 3),
    difficulty: (item: ItemView) => 1 + (item.index % 5),
  };
}

describe("scripted end-to-end session", () => {
  it("completes 10 items and the export passes the analysis oracle", async () => {
    const client = new ApiClient(BASE);
    const exportLines: string[] = [];
    for (const [pid, seed] of [
      ["wp1", 11],
      ["wp2", 12],
      ["wp3", 13],
    ] as const) {
      const runner = new SessionRunner(client, scriptedClock());
      const session = await runner.run(pid, seed, scriptedResponder());
      expect(session.status).toBe("complete");
      expect(session.cursor).toBe(10);
      expect(session.items).toHaveLength(10);

      const exported = await client.exportSession(session.session_id);
      expect(exported.status).toBe("complete");
      expect(exported.items).toHaveLength(10);
      for (const item of exported.items) {
        exportLines.push(JSON.stringify(item));
      }
    }
    const sessionsPath = join(workDir, "exported.jsonl");
    writeFileSync(sessionsPath, exportLines.join("\n") + "\n");

    const oracle = `
import json, sys
from seglit.analysis import analyze
from seglit.ingest import load_question_bank
from seglit.protocol import (Assignment, derive_timings, read_sessions,
                             validate_assignment)

sessions_path, bank_path = sys.argv[1], sys.argv[2]
with open(sessions_path, encoding="utf-8") as fh:
    logs = read_sessions(fh)
assert len(logs) == 3, len(logs)
for log in logs:
    derive_timings(log)  # monotonic event order per item
    items = tuple((i.text_id, i.condition) for i in log.items)
    seed = {"wp1": 11, "wp2": 12, "wp3": 13}[log.participant_id]
    violations = validate_assignment(Assignment(log.participant_id, seed, items))
    assert violations == [], violations
with open(bank_path, encoding="utf-8") as fh:
    bank = load_question_bank(fh)
report = analyze(logs, bank)
assert report["n_participants"] == 3
assert len(report["mcq"]) == 12
print("oracle-ok")
`;
    const out = python(
      ["-", sessionsPath, join(workDir, "bank.json")],
      oracle,
    );
    expect(out).toContain("oracle-ok");
  });

  it("resumes at the server cursor instead of duplicating items", async () => {
    const client = new ApiClient(BASE);
    const created = await client.createSession("wp-resume", 99);
    const first = await client.nextItem(created.session_id);
    expect(first.done).toBe(false);
    if (first.done) return;
    await client.submit(created.session_id, {
      index: first.index,
      mcq: [0, 0, 0, 0],
      keywords: [],
      difficulty: 3,
      text_shown_at: 10,
      answers_opened_at: 20,
      answers_submitted_at: 30,
    });
    // a "refreshed" client sees the same session advanced by one
    const refreshed = await client.createSession("wp-resume", 99);
    expect(refreshed.session_id).toBe(created.session_id);
    expect(refreshed.cursor).toBe(1);
    const next = await client.nextItem(refreshed.session_id);
    expect(next.done).toBe(false);
    if (!next.done) {
      expect(next.index).toBe(1);
    }
  });
});
