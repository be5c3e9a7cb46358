import * as fs from "fs";
import * as YAML from "yaml";

/** Training run configuration, loaded from YAML with strict keys. */
export interface TrainingConfig {
  seed: number;
  places: number;
  imagesPerPlace: number;
  imageSize: number;
  channelPlan: [number, number, number, number];
  groups: number;
  dilations: number[];
  clusters: number;
  learningRate: number;
  iterations: number;
  margin: number;
  negativesPerQuery: number;
}

// The toy trainer runs on the pure-JS backend, so the defaults trade
// width for op count; the canonical retrieval architecture (groups 4,
// dilations {1,2,3}, plan 28..224) lives in DEFAULT_BACKBONE.
export const DEFAULT_TRAINING: TrainingConfig = {
  seed: 1,
  places: 5,
  imagesPerPlace: 4,
  imageSize: 24,
  channelPlan: [8, 8, 16, 16],
  groups: 2,
  dilations: [1, 2],
  clusters: 4,
  learningRate: 0.05,
  iterations: 50,
  margin: 0.1,
  negativesPerQuery: 3,
};

export function loadTrainingConfig(filePath?: string): TrainingConfig {
  if (!filePath) return { ...DEFAULT_TRAINING };
  const raw = YAML.parse(fs.readFileSync(filePath, "utf-8")) ?? {};
  const allowed = new Set(Object.keys(DEFAULT_TRAINING));
  for (const key of Object.keys(raw)) {
    if (!allowed.has(key)) {
      throw new Error(`unknown training config key: ${key}`);
    }
  }
  const merged = { ...DEFAULT_TRAINING, ...raw } as TrainingConfig;
  if (merged.margin <= 0) throw new Error("margin must be > 0");
  if (merged.channelPlan.length !== 4) throw new Error("channelPlan needs 4 entries");
  return merged;
}
