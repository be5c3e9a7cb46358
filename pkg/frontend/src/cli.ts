import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadTrainingConfig } from "./config";
import { makeToyDataset } from "./data";
import { RetrievalModel } from "./model";
import {
  Described,
  ensureDir,
  exportMatches,
  recallAtN,
  writeBeaconsCsv,
  writeDescriptors,
} from "./retrieval";
import { trainTriplets } from "./train";

async function describeAll(model: RetrievalModel, images: tf.Tensor4D): Promise<Float32Array[]> {
  return model.describeToArrays(images);
}

async function cmdTrain(configPath: string | undefined, outDir: string): Promise<void> {
  const cfg = loadTrainingConfig(configPath);
  ensureDir(outDir);
  const { images, labels } = makeToyDataset({
    places: cfg.places,
    imagesPerPlace: cfg.imagesPerPlace,
    imageSize: cfg.imageSize,
    seed: cfg.seed,
  });
  const model = new RetrievalModel({
    backbone: {
      channelPlan: cfg.channelPlan,
      groups: cfg.groups,
      dilations: cfg.dilations,
      seed: cfg.seed,
    },
    clusters: cfg.clusters,
  });
  console.log(`model parameters: ${model.parameterCount()}`);

  const { losses } = trainTriplets(model, images, labels, {
    iterations: cfg.iterations,
    learningRate: cfg.learningRate,
    margin: cfg.margin,
    negativesPerQuery: cfg.negativesPerQuery,
  });
  console.log(
    `loss: first=${losses[0].toFixed(4)} last=${losses[losses.length - 1].toFixed(4)}`
  );
  fs.writeFileSync(
    path.join(outDir, "losses.json"),
    JSON.stringify({ losses }, null, 2) + "\n"
  );

  const descs = await describeAll(model, images);
  const database: Described[] = descs.map((d, i) => ({
    id: `B${String(i + 1).padStart(2, "0")}`,
    descriptor: d,
  }));
  writeDescriptors(path.join(outDir, "descriptors"), database);

  // Lay the toy places on a grid so the beacon CSV is geometrically valid.
  writeBeaconsCsv(
    database.map((d, i) => ({
      id: d.id,
      x: 50.0 * labels[i],
      y: 10.0 * (i % cfg.imagesPerPlace),
      label: `place${labels[i]}`,
    })),
    path.join(outDir, "beacons.csv")
  );
  exportMatches(
    database.map((d, i) => ({ key: i + 1, described: d })),
    database,
    path.join(outDir, "matches.jsonl")
  );

  const queries = database.map((d, i) => ({
    query: d,
    relevantIds: new Set(
      database.filter((_, j) => labels[j] === labels[i]).map((x) => x.id)
    ),
  }));
  console.log(`self recall@1: ${recallAtN(queries, database, 1).toFixed(3)}`);
  images.dispose();
}

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "train",
      "train on the toy place set and export descriptors + match lists",
      (y) =>
        y
          .option("config", { type: "string", describe: "training config YAML" })
          .option("out", { type: "string", demandOption: true }),
      async (argv) => {
        await cmdTrain(argv.config, argv.out);
      }
    )
    .demandCommand(1)
    .strict()
    .parseAsync();
}

main().catch((err) => {
  console.error(`error: ${err.message}`);
  process.exit(2);
});
