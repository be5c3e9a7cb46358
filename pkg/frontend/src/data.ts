import * as tf from "@tensorflow/tfjs";
import { gaussian, mulberry32 } from "./rng";

export interface ToyDatasetConfig {
  places: number;
  imagesPerPlace: number;
  imageSize: number;
  seed?: number;
  noise?: number;
}

export interface ToyDataset {
  images: tf.Tensor4D; // [N, S, S, 3]
  labels: number[]; // place index per image
}

/** Separable synthetic "places": each place has its own arrangement of
 * colored blobs; views of the same place jitter the blob centers and add
 * pixel noise. Deterministic for a fixed seed. */
export function makeToyDataset(cfg: ToyDatasetConfig): ToyDataset {
  const rand = mulberry32(cfg.seed ?? 1);
  const normal = gaussian(rand);
  const s = cfg.imageSize;
  const noise = cfg.noise ?? 0.05;

  interface Blob {
    cx: number;
    cy: number;
    r: number;
    color: [number, number, number];
  }
  const placeBlobs: Blob[][] = [];
  for (let p = 0; p < cfg.places; p++) {
    const blobs: Blob[] = [];
    for (let b = 0; b < 3; b++) {
      blobs.push({
        cx: (0.15 + 0.7 * rand()) * s,
        cy: (0.15 + 0.7 * rand()) * s,
        r: (0.10 + 0.15 * rand()) * s,
        color: [rand(), rand(), rand()],
      });
    }
    placeBlobs.push(blobs);
  }

  const n = cfg.places * cfg.imagesPerPlace;
  const data = new Float32Array(n * s * s * 3);
  const labels: number[] = [];
  let img = 0;
  for (let p = 0; p < cfg.places; p++) {
    for (let v = 0; v < cfg.imagesPerPlace; v++) {
      const base = img * s * s * 3;
      for (const blob of placeBlobs[p]) {
        const cx = blob.cx + normal() * 0.02 * s;
        const cy = blob.cy + normal() * 0.02 * s;
        for (let y = 0; y < s; y++) {
          for (let x = 0; x < s; x++) {
            const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const w = Math.exp(-d2 / (2 * blob.r * blob.r));
            if (w < 1e-3) continue;
            const idx = base + (y * s + x) * 3;
            data[idx] += w * blob.color[0];
            data[idx + 1] += w * blob.color[1];
            data[idx + 2] += w * blob.color[2];
          }
        }
      }
      for (let i = base; i < base + s * s * 3; i++) {
        data[i] += noise * normal();
      }
      labels.push(p);
      img++;
    }
  }
  return { images: tf.tensor(data, [n, s, s, 3]), labels };
}
