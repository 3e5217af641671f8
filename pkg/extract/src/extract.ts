/**
 * Orchestration: CSVs in, four embedding stores + sidecar (+ parses) out.
 *
 * Head stores carry one row per headline; body stores one row per sentence,
 * untruncated (the fixed-length cap is a training-time policy). All writes
 * are atomic (write-then-rename), and the manifest lands first.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { headlineTable, readBodiesCsv, readStancesCsv } from "./csv";
import type { SentenceEncoder } from "./encoder";
import {
  buildManifest,
  checkEncodersAgainstManifest,
  Manifest,
  writeManifest,
} from "./manifest";
import { Space, Store, StoreRecord, Unit, writeStore } from "./store";
import { parseHeadlines } from "./conllu";
import { tokenizeBodies } from "./tokenize";

export interface ExtractOptions {
  stancesPath: string;
  bodiesPath: string;
  outDir: string;
  simEncoder: SentenceEncoder;
  nliEncoder: SentenceEncoder;
  parse?: boolean;
  log?: (message: string) => void;
}

export interface ExtractResult {
  manifest: Manifest;
  headlines: string[];
  emptyBodies: number[];
  parsedHeadlines?: number;
  skippedHeadlines?: number[];
}

function headStore(
  space: Space,
  texts: string[],
  encoder: SentenceEncoder,
): Store {
  const vectors = encoder.encode(texts);
  const records: StoreRecord[] = vectors.map((values, id) => ({
    id,
    numRows: 1,
    values,
  }));
  return { space, unit: Unit.HEAD, dim: encoder.info.dim, records };
}

function bodyStore(
  space: Space,
  sentences: Map<number, string[]>,
  encoder: SentenceEncoder,
): Store {
  const records: StoreRecord[] = [];
  for (const [id, sents] of [...sentences.entries()].sort((a, b) => a[0] - b[0])) {
    const dim = encoder.info.dim;
    const matrix = new Float32Array(sents.length * dim);
    const rows = encoder.encode(sents);
    rows.forEach((row, r) => matrix.set(row, r * dim));
    records.push({ id, numRows: sents.length, values: matrix });
  }
  return { space, unit: Unit.BODY, dim: encoder.info.dim, records };
}

export function extractStores(options: ExtractOptions): ExtractResult {
  const log = options.log ?? (() => undefined);
  fs.mkdirSync(options.outDir, { recursive: true });

  const stances = readStancesCsv(options.stancesPath);
  const bodies = readBodiesCsv(options.bodiesPath);
  const headlines = headlineTable(stances);
  log(`${stances.length} samples, ${headlines.length} headlines, ` +
      `${bodies.size} bodies`);

  const out = (name: string) => path.join(options.outDir, name);
  const outputs: Record<string, string> = {
    sim_head: out("sim_head.store"),
    nli_head: out("nli_head.store"),
    sim_body: out("sim_body.store"),
    nli_body: out("nli_body.store"),
    sidecar: out("headlines.txt"),
  };
  if (options.parse) outputs.parses = out("headlines.conllu");

  const manifest = buildManifest(
    options.simEncoder, options.nliEncoder,
    options.stancesPath, options.bodiesPath, outputs,
  );
  writeManifest(out("manifest.json"), manifest);
  checkEncodersAgainstManifest(manifest, options.simEncoder, options.nliEncoder);

  const tokenized = tokenizeBodies(bodies);
  const emptyBodies = [...tokenized.entries()]
    .filter(([, t]) => t.empty)
    .map(([id]) => id);
  if (emptyBodies.length > 0) {
    log(`${emptyBodies.length} body(ies) tokenized to zero sentences: ` +
        emptyBodies.join(", "));
  }
  const sentences = new Map(
    [...tokenized.entries()].map(([id, t]) => [id, t.sentences]),
  );

  for (const text of headlines) {
    if (text.includes("\n") || text.includes("\r")) {
      throw new Error(`headline contains a newline: ${JSON.stringify(text)}`);
    }
  }
  const sidecarTmp = out(".headlines.txt.tmp");
  fs.writeFileSync(sidecarTmp, headlines.map((h) => h + "\n").join(""));
  fs.renameSync(sidecarTmp, outputs.sidecar);

  writeStore(outputs.sim_head, headStore(Space.SIM, headlines, options.simEncoder));
  writeStore(outputs.nli_head, headStore(Space.NLI, headlines, options.nliEncoder));
  writeStore(outputs.sim_body, bodyStore(Space.SIM, sentences, options.simEncoder));
  writeStore(outputs.nli_body, bodyStore(Space.NLI, sentences, options.nliEncoder));
  log("stores written");

  const result: ExtractResult = { manifest, headlines, emptyBodies };
  if (options.parse) {
    const parsed = parseHeadlines(headlines);
    fs.writeFileSync(outputs.parses, parsed.conllu);
    result.parsedHeadlines = parsed.parsed;
    result.skippedHeadlines = parsed.skipped;
    if (parsed.skipped.length > 0) {
      log(`skipped headline id(s): ${parsed.skipped.join(", ")}`);
    }
  }
  return result;
}
