// Inference helpers: turn softmax outputs into usable thresholds and
// tabulate them next to the instance parameters they belong to.

import * as tf from "@tensorflow/tfjs";
import {
  FeatureScaler,
  TrainingExample,
  applyScaler,
} from "./dataset";

export interface TrainedClassifier {
  model: tf.LayersModel;
  scaler: FeatureScaler;
  labelSpace: number;
}

// A threshold is meaningful only within 1..horizon for its instance.
export function clipDelta(delta: number, horizon: number): number {
  return Math.min(Math.max(delta, 1), horizon);
}

export function predictProbabilities(
  classifier: TrainedClassifier,
  examples: readonly TrainingExample[],
): number[][] {
  return tf.tidy(() => {
    const xs = tf.tensor2d(
      examples.map((ex) => applyScaler(classifier.scaler, ex.features)),
    );
    const probs = classifier.model.predict(xs) as tf.Tensor2D;
    return probs.arraySync();
  });
}

export function predictDeltas(
  classifier: TrainedClassifier,
  examples: readonly TrainingExample[],
): number[] {
  const probs = predictProbabilities(classifier, examples);
  return probs.map((row, i) => {
    let best = 0;
    for (let k = 1; k < row.length; k++) {
      if (row[k] > row[best]) {
        best = k;
      }
    }
    return clipDelta(best + 1, examples[i].horizon);
  });
}

export const PREDICTION_HEADER = [
  "L",
  "T",
  "p",
  "c_ex",
  "omega",
  "gamma",
  "delta_predicted",
];

// Rows echo the source parameter cells verbatim so consumers that key on
// the printed values match them exactly.
export function predictionRows(
  examples: readonly TrainingExample[],
  deltas: readonly number[],
): string[][] {
  if (examples.length !== deltas.length) {
    throw new Error(
      `have ${examples.length} examples but ${deltas.length} predictions`,
    );
  }
  return examples.map((ex, i) => [...ex.rawFeatures, String(deltas[i])]);
}
