/**
 * Extraction manifest: pinned encoder identities, tokenizer id, and input
 * corpus hashes. Written before any store so a partial run is detectable,
 * and checked against the live encoders, which are refused on mismatch.
 */

import { createHash } from "node:crypto";
import * as fs from "node:fs";
import type { EncoderInfo, SentenceEncoder } from "./encoder";

export const TOKENIZER_ID = "regex-sentence-splitter-v1";

export interface Manifest {
  sim_encoder: EncoderInfo;
  nli_encoder: EncoderInfo;
  tokenizer: string;
  corpus_hashes: { stances: string; bodies: string };
  outputs: Record<string, string>;
}

export function sha256File(path: string): string {
  return createHash("sha256").update(fs.readFileSync(path)).digest("hex");
}

export function buildManifest(
  sim: SentenceEncoder,
  nli: SentenceEncoder,
  stancesPath: string,
  bodiesPath: string,
  outputs: Record<string, string>,
): Manifest {
  return {
    sim_encoder: sim.info,
    nli_encoder: nli.info,
    tokenizer: TOKENIZER_ID,
    corpus_hashes: {
      stances: sha256File(stancesPath),
      bodies: sha256File(bodiesPath),
    },
    outputs,
  };
}

export function writeManifest(path: string, manifest: Manifest): void {
  fs.writeFileSync(path, JSON.stringify(manifest, null, 2) + "\n");
}

export function readManifest(path: string): Manifest {
  return JSON.parse(fs.readFileSync(path, "utf-8")) as Manifest;
}

function sameEncoder(a: EncoderInfo, b: EncoderInfo): boolean {
  return a.id === b.id && a.version === b.version && a.dim === b.dim;
}

/** Abort when the live encoders do not match the recorded pins. */
export function checkEncodersAgainstManifest(
  manifest: Manifest,
  sim: SentenceEncoder,
  nli: SentenceEncoder,
): void {
  if (!sameEncoder(manifest.sim_encoder, sim.info)) {
    throw new Error(
      `similarity encoder mismatch: manifest pins ` +
        `${JSON.stringify(manifest.sim_encoder)}, loaded ${JSON.stringify(sim.info)}`,
    );
  }
  if (!sameEncoder(manifest.nli_encoder, nli.info)) {
    throw new Error(
      `inference encoder mismatch: manifest pins ` +
        `${JSON.stringify(manifest.nli_encoder)}, loaded ${JSON.stringify(nli.info)}`,
    );
  }
}
