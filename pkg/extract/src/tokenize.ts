/**
 * Sentence tokenization for article bodies.
 *
 * Splits on sentence-final punctuation followed by whitespace and an
 * upper-case/digit/opening-quote start, with a short abbreviation guard.
 * Bodies that tokenize to nothing are flagged rather than rejected.
 */

const ABBREVIATIONS = new Set([
  "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "inc",
  "ltd", "co", "corp", "gov", "gen", "sen", "rep", "capt", "sgt", "dept",
  "approx", "est", "fig", "no", "vol",
]);

const BOUNDARY = /([.!?]+)(\s+)(?=["'“‘(\[]?[A-Z0-9])/g;

export interface TokenizedBody {
  sentences: string[];
  /** true when the raw text produced no sentences */
  empty: boolean;
}

export function splitSentences(text: string): string[] {
  const normalized = text.replace(/\s+/g, " ").trim();
  if (!normalized) return [];
  const pieces: string[] = [];
  let start = 0;
  for (const match of normalized.matchAll(BOUNDARY)) {
    const end = match.index! + match[1].length;
    const candidate = normalized.slice(start, end).trim();
    const lastWord = candidate
      .slice(0, -match[1].length)
      .split(/\s+/)
      .pop()
      ?.toLowerCase()
      .replace(/[^a-z.]/g, "");
    if (lastWord && ABBREVIATIONS.has(lastWord.replace(/\.$/, ""))) {
      continue; // not a sentence boundary after a known abbreviation
    }
    if (candidate) pieces.push(candidate);
    start = end + match[2].length;
  }
  const tail = normalized.slice(start).trim();
  if (tail) pieces.push(tail);
  return pieces;
}

export function tokenizeBodies(
  bodies: Map<number, string>,
): Map<number, TokenizedBody> {
  const out = new Map<number, TokenizedBody>();
  for (const [id, text] of bodies) {
    const sentences = splitSentences(text);
    out.set(id, { sentences, empty: sentences.length === 0 });
  }
  return out;
}
