// Command line entry point.
//
//   node dist/cli.js train --data ../data/dataset.csv --out reports
//
// Trains the threshold classifier, trains it a second time with the same
// seed to confirm the metrics reproduce, then writes
//   <out>/metrics.json       training and holdout metrics
//   <out>/predictions.csv    per-instance thresholds, consumable by the
//                            station CLI's experiment --delta-from flag

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";
import { readCsvFile, writeCsvFile } from "./csv";
import { loadExamples } from "./dataset";
import { PREDICTION_HEADER, predictDeltas, predictionRows } from "./predict";
import { DEFAULT_OPTIONS, metricsAgree, trainClassifier } from "./train";

function usage(): never {
  console.error(
    "usage: cli train --data <dataset.csv> --out <dir> " +
      "[--epochs N] [--batch-size N] [--learning-rate X] [--seed N] " +
      "[--holdout X] [--skip-retrain-check]",
  );
  process.exit(2);
}

async function runTrain(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      data: { type: "string" },
      out: { type: "string" },
      epochs: { type: "string" },
      "batch-size": { type: "string" },
      "learning-rate": { type: "string" },
      seed: { type: "string" },
      holdout: { type: "string" },
      "skip-retrain-check": { type: "boolean", default: false },
    },
  });
  if (!values.data || !values.out) {
    usage();
  }

  const opts = {
    epochs: values.epochs ? Number(values.epochs) : DEFAULT_OPTIONS.epochs,
    batchSize: values["batch-size"]
      ? Number(values["batch-size"])
      : DEFAULT_OPTIONS.batchSize,
    learningRate: values["learning-rate"]
      ? Number(values["learning-rate"])
      : DEFAULT_OPTIONS.learningRate,
    seed: values.seed ? Number(values.seed) : DEFAULT_OPTIONS.seed,
    holdoutFraction: values.holdout
      ? Number(values.holdout)
      : DEFAULT_OPTIONS.holdoutFraction,
  };

  const dataset = loadExamples(readCsvFile(values.data));
  console.log(
    `loaded ${dataset.examples.length} labeled instances, ` +
      `label space 1..${dataset.labelSpace}`,
  );

  const logEvery = Math.max(1, Math.floor(opts.epochs / 8));
  const first = await trainClassifier(dataset, {
    ...opts,
    onEpoch: (epoch, loss) => {
      if (epoch % logEvery === 0 || epoch === opts.epochs) {
        console.log(`epoch ${epoch}/${opts.epochs} loss ${loss.toFixed(4)}`);
      }
    },
  });
  console.log(
    `holdout top-1 accuracy ${first.metrics.holdout_top1_accuracy.toFixed(4)} ` +
      `over ${first.metrics.holdout_rows} rows`,
  );

  let retrainReproduces: boolean;
  if (values["skip-retrain-check"]) {
    retrainReproduces = false;
    console.log("retrain check skipped; metrics marked as not reproduced");
  } else {
    console.log("retraining with the same seed to confirm reproducibility");
    const second = await trainClassifier(dataset, opts);
    retrainReproduces = metricsAgree(first.metrics, second.metrics);
    console.log(
      retrainReproduces
        ? "retrain reproduced the metrics exactly"
        : "retrain DID NOT reproduce the metrics",
    );
    second.classifier.model.dispose();
  }

  fs.mkdirSync(values.out, { recursive: true });
  const metricsPath = path.join(values.out, "metrics.json");
  fs.writeFileSync(
    metricsPath,
    JSON.stringify(
      { ...first.metrics, retrain_reproduces_metrics: retrainReproduces },
      null,
      2,
    ) + "\n",
  );

  const deltas = predictDeltas(first.classifier, dataset.examples);
  const predictionsPath = path.join(values.out, "predictions.csv");
  writeCsvFile(
    predictionsPath,
    PREDICTION_HEADER,
    predictionRows(dataset.examples, deltas),
  );
  console.log(`wrote ${metricsPath} and ${predictionsPath}`);
  first.classifier.model.dispose();
}

async function main(): Promise<void> {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "train") {
    await runTrain(rest);
  } else {
    usage();
  }
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : err);
  process.exit(1);
});
