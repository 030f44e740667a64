// Dense classifier over the six station parameters.
//
// Two rectified-linear hidden layers of 256 and 512 units feed a softmax
// over threshold values 1..labelSpace. All initializers are seeded so a
// rebuild with the same seed starts from identical weights.

import * as tf from "@tensorflow/tfjs";
import { FEATURE_NAMES } from "./dataset";

export const HIDDEN_UNITS = [256, 512] as const;

export function buildClassifier(
  labelSpace: number,
  seed: number,
  learningRate: number,
): tf.LayersModel {
  if (!Number.isInteger(labelSpace) || labelSpace < 1) {
    throw new Error(`label space must be a positive integer: ${labelSpace}`);
  }
  const model = tf.sequential();
  model.add(
    tf.layers.dense({
      units: HIDDEN_UNITS[0],
      activation: "relu",
      inputShape: [FEATURE_NAMES.length],
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
      biasInitializer: "zeros",
    }),
  );
  model.add(
    tf.layers.dense({
      units: HIDDEN_UNITS[1],
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
      biasInitializer: "zeros",
    }),
  );
  model.add(
    tf.layers.dense({
      units: labelSpace,
      activation: "softmax",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2 }),
      biasInitializer: "zeros",
    }),
  );
  model.compile({
    optimizer: tf.train.adam(learningRate),
    loss: "categoricalCrossentropy",
    metrics: ["accuracy"],
  });
  return model;
}

export function parameterCount(model: tf.LayersModel): number {
  return model.countParams();
}
