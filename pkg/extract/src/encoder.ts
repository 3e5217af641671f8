/**
 * Sentence encoders.
 *
 * The reference pipeline pins two pretrained sentence models (384-dim
 * similarity MiniLM, 768-dim NLI distilled-RoBERTa); their identifiers are
 * recorded here so a real backend can be plugged in behind the same
 * interface. Offline operation and tests use a deterministic bag-of-words
 * hash encoder: each token hashes to a fixed pseudo-random unit direction
 * and a sentence is the normalized token sum, so token overlap produces
 * cosine similarity.
 */

import { createHash } from "node:crypto";

export interface EncoderInfo {
  id: string;
  version: string;
  dim: number;
}

export interface SentenceEncoder {
  readonly info: EncoderInfo;
  encode(sentences: string[]): Float32Array[];
}

/** Pinned identifiers of the reference encoders (not bundled offline). */
export const PINNED_SIM_ENCODER: EncoderInfo = {
  id: "sentence-transformers/all-MiniLM-L6-v2",
  version: "v2",
  dim: 384,
};

export const PINNED_NLI_ENCODER: EncoderInfo = {
  id: "sentence-transformers/nli-distilroberta-base-v2",
  version: "v2",
  dim: 768,
};

function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9']+/g) ?? [];
}

/** xorshift128 seeded from a hash digest; deterministic across platforms. */
function prngFromDigest(digest: Buffer): () => number {
  let s0 = digest.readUInt32LE(0) || 1;
  let s1 = digest.readUInt32LE(4) || 2;
  let s2 = digest.readUInt32LE(8) || 3;
  let s3 = digest.readUInt32LE(12) || 4;
  return () => {
    const t = s1 << 9;
    let r = s0 * 5;
    r = ((r << 7) | (r >>> 25)) * 9;
    s2 ^= s0;
    s3 ^= s1;
    s1 ^= s2;
    s0 ^= s3;
    s2 ^= t;
    s3 = (s3 << 11) | (s3 >>> 21);
    return (r >>> 0) / 4294967296;
  };
}

export class HashEncoder implements SentenceEncoder {
  readonly info: EncoderInfo;
  private cache = new Map<string, Float64Array>();

  constructor(dim: number, flavor: "sim" | "nli") {
    this.info = { id: `hash-bow-${flavor}`, version: "1", dim };
  }

  private tokenVector(token: string): Float64Array {
    let vec = this.cache.get(token);
    if (vec) return vec;
    const digest = createHash("sha256")
      .update(`${this.info.id}:${token}`)
      .digest();
    const next = prngFromDigest(digest);
    vec = new Float64Array(this.info.dim);
    for (let i = 0; i < this.info.dim; i += 2) {
      // Box-Muller: two uniforms -> two gaussians
      const u = Math.max(next(), 1e-12);
      const v = next();
      const r = Math.sqrt(-2 * Math.log(u));
      vec[i] = r * Math.cos(2 * Math.PI * v);
      if (i + 1 < this.info.dim) vec[i + 1] = r * Math.sin(2 * Math.PI * v);
    }
    this.cache.set(token, vec);
    return vec;
  }

  encode(sentences: string[]): Float32Array[] {
    return sentences.map((sentence) => {
      const sum = new Float64Array(this.info.dim);
      const tokens = tokenize(sentence);
      for (const token of tokens) {
        const vec = this.tokenVector(token);
        for (let i = 0; i < sum.length; i++) sum[i] += vec[i];
      }
      let norm = Math.hypot(...sum);
      if (norm === 0) {
        // degenerate sentence (no tokens): a fixed unit direction
        sum[0] = 1;
        norm = 1;
      }
      const out = new Float32Array(this.info.dim);
      for (let i = 0; i < sum.length; i++) out[i] = sum[i] / norm;
      return out;
    });
  }
}

/**
 * Resolve an encoder spec string. Supported: "hash-bow:<dim>" (offline
 * deterministic). The pinned reference identifiers are refused with an
 * actionable message since their weights cannot be bundled here.
 */
export function createEncoder(
  spec: string,
  flavor: "sim" | "nli",
): SentenceEncoder {
  const hash = spec.match(/^hash-bow:(\d+)$/);
  if (hash) return new HashEncoder(parseInt(hash[1], 10), flavor);
  if (spec === PINNED_SIM_ENCODER.id || spec === PINNED_NLI_ENCODER.id) {
    throw new Error(
      `${spec} requires the pretrained weights; plug a SentenceEncoder ` +
        "implementation into extractStores instead of the CLI default",
    );
  }
  throw new Error(`unknown encoder spec ${spec}`);
}
