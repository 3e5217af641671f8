/** Readers for the stances / bodies CSV schemas (RFC-4180, UTF-8). */

import * as fs from "node:fs";
import Papa from "papaparse";

export interface StanceRow {
  headline: string;
  bodyId: number;
  stance: string;
}

/** NFC-normalize + trim: the headline identity rule shared with the trainer. */
export function normalizeHeadline(text: string): string {
  return text.normalize("NFC").trim();
}

function parseCsv(path: string, requiredColumns: string[]): Record<string, string>[] {
  const raw = fs.readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(raw, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of requiredColumns) {
    if (!fields.includes(column)) {
      throw new Error(`${path}: missing column ${column}`);
    }
  }
  return parsed.data;
}

export function readStancesCsv(path: string): StanceRow[] {
  return parseCsv(path, ["Headline", "Body ID", "Stance"]).map((row, i) => {
    const bodyId = parseInt(row["Body ID"], 10);
    if (!Number.isInteger(bodyId)) {
      throw new Error(`${path}: bad Body ID ${row["Body ID"]} (row ${i + 2})`);
    }
    return { headline: row["Headline"], bodyId, stance: row["Stance"] };
  });
}

export function readBodiesCsv(path: string): Map<number, string> {
  const bodies = new Map<number, string>();
  for (const [i, row] of parseCsv(path, ["Body ID", "articleBody"]).entries()) {
    const bodyId = parseInt(row["Body ID"], 10);
    if (!Number.isInteger(bodyId)) {
      throw new Error(`${path}: bad Body ID ${row["Body ID"]} (row ${i + 2})`);
    }
    if (bodies.has(bodyId)) {
      throw new Error(`${path}: duplicate Body ID ${bodyId}`);
    }
    bodies.set(bodyId, row["articleBody"] ?? "");
  }
  return bodies;
}

/** Headline id table: order of first appearance over normalized text. */
export function headlineTable(rows: StanceRow[]): string[] {
  const seen = new Set<string>();
  const table: string[] = [];
  for (const row of rows) {
    const text = normalizeHeadline(row.headline);
    if (!seen.has(text)) {
      seen.add(text);
      table.push(text);
    }
  }
  return table;
}
