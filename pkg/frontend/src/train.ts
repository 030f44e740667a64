// Training harness.
//
// The split, the weight initialization, and the batch order are all fixed
// by the seed, and the fit itself runs single-threaded on the CPU backend,
// so training the same data with the same options twice produces the same
// weights and therefore byte-identical metrics.

import * as tf from "@tensorflow/tfjs";
import {
  DataTooSmallError,
  LabeledDataset,
  TrainingExample,
  applyScaler,
  fitScaler,
  splitExamples,
} from "./dataset";
import { buildClassifier, parameterCount } from "./model";
import { TrainedClassifier, predictDeltas, predictProbabilities } from "./predict";

export const MIN_TRAINING_ROWS = 100;

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  holdoutFraction: number;
  seed: number;
  onEpoch?: (epoch: number, loss: number) => void;
}

export const DEFAULT_OPTIONS: TrainOptions = {
  epochs: 160,
  batchSize: 64,
  learningRate: 1e-3,
  holdoutFraction: 0.2,
  seed: 7,
};

export interface TrainMetrics {
  instances: number;
  train_rows: number;
  holdout_rows: number;
  holdout_top1_accuracy: number;
  train_top1_accuracy: number;
  holdout_loss: number;
  label_space: number;
  parameter_count: number;
  seed: number;
  epochs: number;
  batch_size: number;
  learning_rate: number;
  holdout_fraction: number;
  loss_note: string;
}

export interface TrainResult {
  classifier: TrainedClassifier;
  metrics: TrainMetrics;
}

function tensorsFor(
  examples: readonly TrainingExample[],
  classifier: Pick<TrainedClassifier, "scaler" | "labelSpace">,
): { xs: tf.Tensor2D; ys: tf.Tensor2D } {
  const xs = tf.tensor2d(
    examples.map((ex) => applyScaler(classifier.scaler, ex.features)),
  );
  const ys = tf.oneHot(
    tf.tensor1d(examples.map((ex) => ex.delta - 1), "int32"),
    classifier.labelSpace,
  ) as tf.Tensor2D;
  return { xs, ys };
}

export function topOneAccuracy(
  classifier: TrainedClassifier,
  examples: readonly TrainingExample[],
): number {
  const deltas = predictDeltas(classifier, examples);
  let correct = 0;
  for (let i = 0; i < examples.length; i++) {
    if (deltas[i] === examples[i].delta) {
      correct += 1;
    }
  }
  return correct / examples.length;
}

export function crossEntropy(
  classifier: TrainedClassifier,
  examples: readonly TrainingExample[],
): number {
  const probs = predictProbabilities(classifier, examples);
  let total = 0;
  for (let i = 0; i < examples.length; i++) {
    total += -Math.log(Math.max(probs[i][examples[i].delta - 1], 1e-12));
  }
  return total / examples.length;
}

export async function trainClassifier(
  dataset: LabeledDataset,
  options: Partial<TrainOptions> = {},
): Promise<TrainResult> {
  const opts: TrainOptions = { ...DEFAULT_OPTIONS, ...options };
  if (dataset.examples.length < MIN_TRAINING_ROWS) {
    throw new DataTooSmallError(dataset.examples.length, MIN_TRAINING_ROWS);
  }

  const { train, holdout } = splitExamples(
    dataset.examples,
    opts.holdoutFraction,
    opts.seed,
  );
  const scaler = fitScaler(train);
  const model = buildClassifier(dataset.labelSpace, opts.seed, opts.learningRate);
  const classifier: TrainedClassifier = {
    model,
    scaler,
    labelSpace: dataset.labelSpace,
  };

  const { xs, ys } = tensorsFor(train, classifier);
  try {
    await model.fit(xs, ys, {
      epochs: opts.epochs,
      batchSize: opts.batchSize,
      // reshuffling would pull from an unseeded generator
      shuffle: false,
      verbose: 0,
      callbacks: opts.onEpoch
        ? {
            onEpochEnd: async (epoch, logs) => {
              opts.onEpoch!(epoch + 1, logs?.loss ?? NaN);
            },
          }
        : undefined,
    });
  } finally {
    xs.dispose();
    ys.dispose();
  }

  const metrics: TrainMetrics = {
    instances: dataset.examples.length,
    train_rows: train.length,
    holdout_rows: holdout.length,
    holdout_top1_accuracy: topOneAccuracy(classifier, holdout),
    train_top1_accuracy: topOneAccuracy(classifier, train),
    holdout_loss: crossEntropy(classifier, holdout),
    label_space: dataset.labelSpace,
    parameter_count: parameterCount(model),
    seed: opts.seed,
    epochs: opts.epochs,
    batch_size: opts.batchSize,
    learning_rate: opts.learningRate,
    holdout_fraction: opts.holdoutFraction,
    loss_note:
      "categorical cross-entropy on one-hot labels; the loss choice is an assumption of this implementation",
  };
  return { classifier, metrics };
}

// Metrics that must coincide when training is repeated with one seed.
export function metricsAgree(a: TrainMetrics, b: TrainMetrics): boolean {
  return (
    a.holdout_top1_accuracy === b.holdout_top1_accuracy &&
    a.train_top1_accuracy === b.train_top1_accuracy &&
    a.holdout_loss === b.holdout_loss
  );
}
