import { describe, expect, it } from "vitest";

import { DEFAULT_TRAINING } from "../src/config";
import { makeToyDataset } from "../src/data";
import { RetrievalModel } from "../src/model";
import { recallAtN } from "../src/retrieval";
import { trainTriplets } from "../src/train";

describe("triplet training on the toy place set", () => {
  it("halves the loss within 50 iterations and reaches perfect self-recall", async () => {
    const cfg = DEFAULT_TRAINING;
    const { images, labels } = makeToyDataset({
      places: cfg.places,
      imagesPerPlace: cfg.imagesPerPlace,
      imageSize: cfg.imageSize,
      seed: cfg.seed,
    });
    expect(labels).toHaveLength(20);

    const model = new RetrievalModel({
      backbone: {
        channelPlan: cfg.channelPlan,
        groups: cfg.groups,
        dilations: cfg.dilations,
        seed: cfg.seed,
      },
      clusters: cfg.clusters,
    });
    const { losses } = trainTriplets(model, images, labels, {
      iterations: cfg.iterations,
      learningRate: cfg.learningRate,
      margin: cfg.margin,
      negativesPerQuery: cfg.negativesPerQuery,
    });
    expect(losses).toHaveLength(50);
    expect(losses[0]).toBeGreaterThan(0);
    const final = losses[losses.length - 1];
    // eslint-disable-next-line no-console
    console.log(`loss first=${losses[0].toFixed(4)} final=${final.toFixed(4)}`);
    expect(final).toBeLessThan(0.5 * losses[0]);

    const descriptors = await model.describeToArrays(images);
    const database = descriptors.map((d, i) => ({ id: `B${i + 1}`, descriptor: d }));
    const selfQueries = database.map((d, i) => ({
      query: d,
      relevantIds: new Set([database[i].id]),
    }));
    expect(recallAtN(selfQueries, database, 1)).toBe(1.0);
  });
});
