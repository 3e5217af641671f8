/**
 * Heuristic dependency parses of headlines, emitted as CoNLL-U.
 *
 * This is not a full parser: a lexicon-driven tagger plus attachment rules
 * tuned for short news headlines, sufficient for the negation rules
 * downstream (root verb, auxiliary chain, negation modifier). Real treebank
 * parses can be substituted at the same file interface. Headlines the
 * heuristics cannot handle are skipped with a logged id.
 */

export interface ParsedToken {
  index: number;
  form: string;
  lemma: string;
  upos: string;
  head: number;
  deprel: string;
}

const AUX_LEMMAS: Record<string, string> = {
  is: "be", are: "be", was: "be", were: "be", be: "be", been: "be",
  being: "be", am: "be",
  has: "have", have: "have", had: "have", having: "have",
  do: "do", does: "do", did: "do",
  will: "will", would: "would", shall: "shall", should: "should",
  can: "can", could: "could", may: "may", might: "might", must: "must",
};

const DETERMINERS = new Set([
  "the", "a", "an", "this", "that", "these", "those", "its", "his", "her",
  "their", "our", "my", "your", "some", "any", "no", "each", "every",
]);

const ADPOSITIONS = new Set([
  "of", "in", "on", "at", "by", "for", "with", "from", "into", "over",
  "after", "before", "under", "about", "against", "between", "during",
  "through", "amid", "near", "to",
]);

const PRONOUNS = new Set(["he", "she", "it", "they", "we", "i", "you", "who"]);
const CONJUNCTIONS = new Set(["and", "or", "but"]);
const ADVERBS = new Set(["now", "here", "there", "soon", "again", "tomorrow",
                         "today", "yesterday", "sharply", "quickly"]);

/** irregular verb form -> lemma */
const IRREGULAR_VERB_FORMS: Record<string, string> = {
  went: "go", gone: "go", goes: "go",
  said: "say", says: "say",
  made: "make", got: "get", gotten: "get", took: "take", taken: "take",
  gave: "give", given: "give", found: "find", came: "come", knew: "know",
  known: "know", thought: "think", rose: "rise", risen: "rise", fell: "fall",
  fallen: "fall", broke: "break", broken: "break", bought: "buy",
  sold: "sell", won: "win", lost: "lose", held: "hold", kept: "keep",
  left: "leave", sent: "send", shut: "shut", sat: "sit", stood: "stand",
  ran: "run", began: "begin", begun: "begin", denied: "deny", met: "meet",
  paid: "pay", told: "tell", built: "build", struck: "strike", shot: "shoot",
  caught: "catch", brought: "bring", led: "lead", drew: "draw", flew: "fly",
};

/** base forms that strip-and-restore lemmatization may recover */
const BASE_VERBS = new Set([
  "open", "close", "shut", "plan", "release", "approve", "arrest", "sign",
  "treat", "spread", "investigate", "confirm", "support", "oppose", "start",
  "stop", "expand", "report", "say", "deny", "claim", "warn", "review",
  "discover", "destroy", "flood", "accuse", "reveal", "announce", "reject",
  "accept", "ban", "kill", "die", "flee", "evacuate", "remember", "use",
  "create", "cause", "force", "urge", "call", "name", "face", "seek",
  "launch", "raise", "cut", "include", "show", "suggest", "increase",
  "decrease", "sink", "rescue", "capture", "surround",
]);

export function tokenizeHeadline(text: string): string[] {
  const tokens: string[] = [];
  const re = /[A-Za-z0-9]+(?:['’][a-z]+)*|[^\sA-Za-z0-9]/g;
  for (const match of text.normalize("NFC").matchAll(re)) {
    const token = match[0];
    const contraction = token.match(/^([A-Za-z]+)n(['’])t$/i);
    if (contraction && contraction[1].toLowerCase() !== "ca") {
      tokens.push(contraction[1], `n${contraction[2]}t`);
    } else if (contraction) {
      tokens.push("can", `n${contraction[2]}t`); // can't
    } else {
      tokens.push(token);
    }
  }
  return tokens;
}

function verbLemma(form: string): string {
  const lower = form.toLowerCase();
  if (IRREGULAR_VERB_FORMS[lower]) return IRREGULAR_VERB_FORMS[lower];
  if (BASE_VERBS.has(lower)) return lower;
  const attempts: string[] = [];
  if (lower.endsWith("ies")) attempts.push(lower.slice(0, -3) + "y");
  if (lower.endsWith("ing")) attempts.push(lower.slice(0, -3));
  if (lower.endsWith("ed")) attempts.push(lower.slice(0, -2), lower.slice(0, -1));
  if (lower.endsWith("es")) attempts.push(lower.slice(0, -2));
  if (lower.endsWith("s")) attempts.push(lower.slice(0, -1));
  for (const stem of attempts.slice()) {
    if (stem.length >= 2 && stem[stem.length - 1] === stem[stem.length - 2]) {
      attempts.push(stem.slice(0, -1)); // planned -> plann -> plan
    }
    attempts.push(stem + "e"); // closed -> clos -> close
  }
  for (const stem of attempts) {
    if (BASE_VERBS.has(stem)) return stem;
  }
  // fall back to the most plausible strip
  if (lower.endsWith("ing")) return lower.slice(0, -3);
  if (lower.endsWith("ed")) return lower.slice(0, -2);
  return lower;
}

function looksVerbal(lower: string): boolean {
  if (IRREGULAR_VERB_FORMS[lower] || BASE_VERBS.has(lower)) return true;
  if (lower.length >= 5 && (lower.endsWith("ed") || lower.endsWith("ing"))) {
    return true;
  }
  const stripped = lower.endsWith("s") ? lower.slice(0, -1) : null;
  return stripped !== null && BASE_VERBS.has(stripped);
}

const NEGATORS = new Set(["not", "n't", "n’t"]);

export function parseHeadline(text: string): ParsedToken[] {
  const forms = tokenizeHeadline(text);
  if (forms.length === 0) throw new Error("no tokens");

  // first pass: coarse tags
  const tags: string[] = forms.map((form, i) => {
    const lower = form.toLowerCase();
    if (/^[^A-Za-z0-9]+$/.test(form)) return "PUNCT";
    if (NEGATORS.has(lower)) return "PART";
    if (AUX_LEMMAS[lower]) return "AUX";
    if (DETERMINERS.has(lower)) return "DET";
    if (CONJUNCTIONS.has(lower)) return "CCONJ";
    if (PRONOUNS.has(lower)) return "PRON";
    if (ADPOSITIONS.has(lower)) return "ADP";
    if (ADVERBS.has(lower) || (lower.length > 4 && lower.endsWith("ly"))) {
      return "ADV";
    }
    if (looksVerbal(lower)) return "VERB";
    if (/^[0-9]/.test(form)) return "NUM";
    return i > 0 && /^[A-Z]/.test(form) ? "PROPN" : "NOUN";
  });

  // a token right after an auxiliary chain acts as the verb even when
  // unknown ("will axe the plan")
  for (let i = 1; i < forms.length; i++) {
    if (
      tags[i] === "NOUN" &&
      (tags[i - 1] === "AUX" ||
        (tags[i - 1] === "PART" && i >= 2 && tags[i - 2] === "AUX"))
    ) {
      tags[i] = "VERB";
    }
  }

  // root: prefer a verb preceded by an auxiliary, else the first verb,
  // else the last nominal
  let root = -1;
  for (let i = 0; i < forms.length; i++) {
    if (tags[i] !== "VERB") continue;
    const prior = tags.slice(Math.max(0, i - 2), i);
    if (prior.includes("AUX")) {
      root = i;
      break;
    }
    if (root < 0) root = i;
  }
  if (root < 0) {
    for (let i = forms.length - 1; i >= 0; i--) {
      if (tags[i] === "NOUN" || tags[i] === "PROPN" || tags[i] === "NUM") {
        root = i;
        break;
      }
    }
  }
  if (root < 0) root = 0;

  const heads = new Array<number>(forms.length).fill(root + 1);
  const deprels = new Array<string>(forms.length).fill("dep");
  heads[root] = 0;
  deprels[root] = "root";
  const rootIsPassive =
    tags[root] === "VERB" && /(?:ed|en)$/.test(forms[root].toLowerCase());

  let sawSubject = false;
  for (let i = 0; i < forms.length; i++) {
    if (i === root) continue;
    const tag = tags[i];
    const lower = forms[i].toLowerCase();
    if (tag === "AUX" && i < root) {
      const isBe = AUX_LEMMAS[lower] === "be";
      deprels[i] = isBe && rootIsPassive ? "aux:pass" : "aux";
    } else if (tag === "PART" && NEGATORS.has(lower)) {
      deprels[i] = "advmod";
    } else if (tag === "DET") {
      for (let j = i + 1; j < forms.length; j++) {
        if (tags[j] === "NOUN" || tags[j] === "PROPN") {
          heads[i] = j + 1;
          deprels[i] = "det";
          break;
        }
      }
    } else if (tag === "ADP") {
      for (let j = i + 1; j < forms.length; j++) {
        if (tags[j] === "NOUN" || tags[j] === "PROPN" || tags[j] === "NUM") {
          heads[i] = j + 1;
          deprels[i] = "case";
          break;
        }
      }
    } else if (tag === "NOUN" || tag === "PROPN" || tag === "PRON" || tag === "NUM") {
      if (i < root && !sawSubject) {
        deprels[i] = rootIsPassive ? "nsubj:pass" : "nsubj";
        sawSubject = true;
      } else {
        const hasCase = i > 0 && deprels[i - 1] === "case";
        deprels[i] = hasCase ? "obl" : i > root ? "obj" : "nmod";
      }
    } else if (tag === "ADV") {
      deprels[i] = "advmod";
    } else if (tag === "PUNCT") {
      deprels[i] = "punct";
    }
  }

  return forms.map((form, i) => {
    const lower = form.toLowerCase();
    let lemma = lower;
    if (tags[i] === "VERB") lemma = verbLemma(form);
    else if (tags[i] === "AUX") lemma = AUX_LEMMAS[lower];
    else if (tags[i] === "PART" && NEGATORS.has(lower)) lemma = "not";
    else if (tags[i] === "PROPN") lemma = form;
    return {
      index: i + 1,
      form,
      lemma,
      upos: tags[i],
      head: heads[i],
      deprel: deprels[i],
    };
  });
}

export function toConllu(headlineId: number, text: string,
                         tokens: ParsedToken[]): string {
  const lines = [`# headline_id = ${headlineId}`, `# text = ${text}`];
  for (const t of tokens) {
    lines.push(
      `${t.index}\t${t.form}\t${t.lemma}\t${t.upos}\t_\t_\t${t.head}\t${t.deprel}\t_\t_`,
    );
  }
  return lines.join("\n");
}

export interface ParseResult {
  conllu: string;
  parsed: number;
  skipped: number[];
}

export function parseHeadlines(headlines: string[]): ParseResult {
  const blocks: string[] = [];
  const skipped: number[] = [];
  for (let id = 0; id < headlines.length; id++) {
    try {
      const tokens = parseHeadline(headlines[id]);
      blocks.push(toConllu(id, headlines[id], tokens));
    } catch {
      skipped.push(id);
    }
  }
  return {
    conllu: blocks.join("\n\n") + (blocks.length ? "\n" : ""),
    parsed: blocks.length,
    skipped,
  };
}
