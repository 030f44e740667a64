// Labeled instances for the threshold classifier.
//
// Each row of the station's dataset export describes one parameterization
// (L, T, p, c_ex, omega, gamma) together with the exhaustively optimized
// dispatch threshold delta_star. Features stay in row order; the raw cell
// text is kept so downstream files can echo the exact parameter spelling.

import { CsvTable } from "./csv";

export const FEATURE_NAMES = [
  "L",
  "T",
  "p",
  "c_ex",
  "omega",
  "gamma",
] as const;

export const LABEL_NAME = "delta_star";

export class DataTooSmallError extends Error {
  constructor(rows: number, minimum: number) {
    super(`DATA_TOO_SMALL: ${rows} rows, need at least ${minimum}`);
    this.name = "DataTooSmallError";
  }
}

export class LabelOutOfRangeError extends Error {
  constructor(detail: string) {
    super(`LABEL_OUT_OF_RANGE: ${detail}`);
    this.name = "LabelOutOfRangeError";
  }
}

export interface TrainingExample {
  // (L, T, p, c_ex, omega, gamma) in column order
  features: number[];
  // best threshold for this instance, 1-based slot count
  delta: number;
  // deadline budget of the instance; the label never exceeds it
  horizon: number;
  // source cells for the six feature columns, echoed into predictions
  rawFeatures: string[];
}

export interface LabeledDataset {
  examples: TrainingExample[];
  // width of the label space: the largest deadline budget in the data
  labelSpace: number;
}

export function loadExamples(table: CsvTable): LabeledDataset {
  const featureIdx = FEATURE_NAMES.map((name) => {
    const idx = table.header.indexOf(name);
    if (idx < 0) {
      throw new Error(`missing column ${name} in ${table.header.join(",")}`);
    }
    return idx;
  });
  const labelIdx = table.header.indexOf(LABEL_NAME);
  if (labelIdx < 0) {
    throw new Error(`missing column ${LABEL_NAME}`);
  }

  const examples: TrainingExample[] = [];
  let labelSpace = 0;
  for (const row of table.rows) {
    const rawFeatures = featureIdx.map((idx) => row[idx]);
    const features = rawFeatures.map(Number);
    if (features.some((x) => !Number.isFinite(x))) {
      throw new Error(`non-finite feature in row: ${row.join(",")}`);
    }
    const horizon = features[1];
    if (!Number.isInteger(horizon) || horizon < 1) {
      throw new Error(`deadline budget must be a positive integer: ${horizon}`);
    }
    const delta = Number(row[labelIdx]);
    if (!Number.isInteger(delta) || delta < 1 || delta > horizon) {
      throw new LabelOutOfRangeError(
        `delta_star=${row[labelIdx]} outside 1..${horizon}`,
      );
    }
    examples.push({ features, delta, horizon, rawFeatures });
    labelSpace = Math.max(labelSpace, horizon);
  }
  return { examples, labelSpace };
}

// Deterministic PRNG over 32-bit integer arithmetic, reproducible across
// platforms. Used only for the train/holdout split.
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface SplitExamples {
  train: TrainingExample[];
  holdout: TrainingExample[];
}

export function splitExamples(
  examples: readonly TrainingExample[],
  holdoutFraction: number,
  seed: number,
): SplitExamples {
  if (!(holdoutFraction > 0 && holdoutFraction < 1)) {
    throw new Error(`holdout fraction must be in (0, 1): ${holdoutFraction}`);
  }
  const order = examples.map((_, i) => i);
  const next = mulberry32(seed);
  for (let i = order.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  const holdoutCount = Math.max(1, Math.round(examples.length * holdoutFraction));
  if (holdoutCount >= examples.length) {
    throw new Error("holdout fraction leaves no training rows");
  }
  const holdout = order.slice(0, holdoutCount).map((i) => examples[i]);
  const train = order.slice(holdoutCount).map((i) => examples[i]);
  return { train, holdout };
}

export interface FeatureScaler {
  mean: number[];
  std: number[];
}

// Fit on the training split only; constant columns get unit scale.
export function fitScaler(examples: readonly TrainingExample[]): FeatureScaler {
  const dim = FEATURE_NAMES.length;
  const mean = new Array(dim).fill(0);
  for (const ex of examples) {
    for (let k = 0; k < dim; k++) {
      mean[k] += ex.features[k];
    }
  }
  for (let k = 0; k < dim; k++) {
    mean[k] /= examples.length;
  }
  const variance = new Array(dim).fill(0);
  for (const ex of examples) {
    for (let k = 0; k < dim; k++) {
      const d = ex.features[k] - mean[k];
      variance[k] += d * d;
    }
  }
  const std = variance.map((v) => {
    const s = Math.sqrt(v / examples.length);
    return s > 1e-8 ? s : 1;
  });
  return { mean, std };
}

export function applyScaler(scaler: FeatureScaler, features: readonly number[]): number[] {
  return features.map((x, k) => (x - scaler.mean[k]) / scaler.std[k]);
}
