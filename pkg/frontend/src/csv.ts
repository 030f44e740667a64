// Plain comma-separated tables: one header row, numeric cells, no quoting.
// Lines starting with "#" carry provenance notes and are skipped on read.

import * as fs from "node:fs";

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0 && !line.startsWith("#"));
  if (lines.length === 0) {
    throw new Error("empty table: no header row");
  }
  const header = lines[0].split(",").map((cell) => cell.trim());
  const rows: string[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",").map((cell) => cell.trim());
    if (cells.length !== header.length) {
      throw new Error(
        `row has ${cells.length} cells, header has ${header.length}: ${line}`,
      );
    }
    rows.push(cells);
  }
  return { header, rows };
}

export function readCsvFile(path: string): CsvTable {
  return parseCsv(fs.readFileSync(path, "utf8"));
}

export function formatCsv(
  header: string[],
  rows: ReadonlyArray<ReadonlyArray<string | number>>,
): string {
  const lines = [header.join(",")];
  for (const row of rows) {
    lines.push(row.map(String).join(","));
  }
  return lines.join("\n") + "\n";
}

export function writeCsvFile(
  path: string,
  header: string[],
  rows: ReadonlyArray<ReadonlyArray<string | number>>,
): void {
  fs.writeFileSync(path, formatCsv(header, rows));
}
