import * as fs from "fs";
import * as path from "path";

export interface Described {
  id: string;
  descriptor: Float32Array | Float64Array | number[];
}

export const TOP_K = 25;

/** Cosine similarity; descriptors from the model are unit-norm, so this
 * is their dot product, but the norms are included for safety. */
export function cosineSimilarity(a: ArrayLike<number>, b: ArrayLike<number>): number {
  if (a.length !== b.length) throw new Error("descriptor dimensions differ");
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) return 0;
  return dot / (Math.sqrt(na) * Math.sqrt(nb));
}

export interface RankedMatch {
  beacon: string;
  sim: number;
}

/** Database ranked by similarity to the query, best first; ties break on
 * the beacon id so output is independent of database ordering. */
export function rankMatches(query: Described, database: Described[]): RankedMatch[] {
  const ranked = database.map((d) => ({
    beacon: d.id,
    sim: cosineSimilarity(query.descriptor, d.descriptor),
  }));
  ranked.sort((a, b) => (b.sim - a.sim) || a.beacon.localeCompare(b.beacon));
  return ranked;
}

/** Fraction of queries whose top-N retrieval hits a correct entry. */
export function recallAtN(
  queries: { query: Described; relevantIds: Set<string> }[],
  database: Described[],
  n: number
): number {
  if (n < 1) throw new Error(`N must be >= 1, got ${n}`);
  if (queries.length === 0) return 0;
  let hits = 0;
  for (const { query, relevantIds } of queries) {
    const top = rankMatches(query, database).slice(0, n);
    if (top.some((m) => relevantIds.has(m.beacon))) hits++;
  }
  return hits / queries.length;
}

/** Write the match JSONL contract: one object per query with up to 25
 * candidates in descending similarity. Numeric keys stay numeric. */
export function exportMatches(
  queries: { key: number | string; described: Described }[],
  database: Described[],
  filePath: string,
  topK: number = TOP_K
): void {
  const lines = queries.map(({ key, described }) => {
    const matches = rankMatches(described, database)
      .slice(0, topK)
      .map((m) => ({ beacon: m.beacon, sim: m.sim }));
    return JSON.stringify({ query: key, matches });
  });
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}

export interface DescriptorSidecar {
  dim: number;
  count: number;
  ids: string[];
}

/** Flat float32 binary plus a JSON sidecar describing it. */
export function writeDescriptors(basePath: string, items: Described[]): void {
  if (items.length === 0) throw new Error("nothing to write");
  const dim = items[0].descriptor.length;
  const buf = new Float32Array(items.length * dim);
  items.forEach((item, i) => {
    if (item.descriptor.length !== dim) throw new Error("inconsistent descriptor dims");
    buf.set(Float32Array.from(item.descriptor as ArrayLike<number>), i * dim);
  });
  fs.writeFileSync(basePath + ".bin", Buffer.from(buf.buffer));
  const sidecar: DescriptorSidecar = { dim, count: items.length, ids: items.map((i) => i.id) };
  fs.writeFileSync(basePath + ".json", JSON.stringify(sidecar, null, 2) + "\n");
}

export function readDescriptors(basePath: string): Described[] {
  const sidecar: DescriptorSidecar = JSON.parse(fs.readFileSync(basePath + ".json", "utf-8"));
  const raw = fs.readFileSync(basePath + ".bin");
  const data = new Float32Array(raw.buffer, raw.byteOffset, sidecar.count * sidecar.dim);
  return sidecar.ids.map((id, i) => ({
    id,
    descriptor: data.slice(i * sidecar.dim, (i + 1) * sidecar.dim),
  }));
}

/** Beacon CSV (id,x,y,label) matching the fusion side's loader. */
export function writeBeaconsCsv(
  beacons: { id: string; x: number; y: number; label?: string }[],
  filePath: string
): void {
  const lines = ["id,x,y,label"];
  for (const b of beacons) {
    lines.push(`${b.id},${b.x},${b.y},${b.label ?? ""}`);
  }
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}

export function ensureDir(dir: string): void {
  fs.mkdirSync(path.resolve(dir), { recursive: true });
}
