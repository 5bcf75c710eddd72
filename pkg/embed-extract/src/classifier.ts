// classifier.ts - linear readout heads producing the logit packs.
//
// Two ways to get a head. The closed-form nearest-centroid head is the
// "load a checkpoint" path: no randomness, no iteration, byte-identical
// across runs. The softmax-regression head is the fine-tuning path: seeded
// minibatch SGD for a fixed number of epochs, holding out part of the train
// split and keeping the weights from the epoch with the best held-out
// accuracy (earliest epoch wins ties).

import { deriveSeed, shuffled } from './rng';

export interface TrainConfig {
  epochs: number;
  learningRate: number;
  batchSize: number;
  seed: bigint;
  valFraction?: number;
}

export interface TrainResult {
  head: LinearHead;
  bestEpoch: number;
  valAccuracy: number;
  history: number[];
}

export class LinearHead {
  // weights is K x m, bias is K
  constructor(readonly weights: number[][], readonly bias: number[]) {}

  logits(x: number[]): number[] {
    const out: number[] = [];
    for (let k = 0; k < this.weights.length; k++) {
      let acc = this.bias[k];
      const row = this.weights[k];
      for (let j = 0; j < row.length; j++) {
        acc += row[j] * x[j];
      }
      out.push(acc);
    }
    return out;
  }

  logitsAll(xs: number[][]): number[][] {
    return xs.map(x => this.logits(x));
  }
}

/** Equal-covariance discriminant from class centroids: c_k . x - |c_k|^2 / 2. */
export function centroidHead(features: number[][], labels: number[], nClasses: number): LinearHead {
  const dim = features[0].length;
  const sums: number[][] = Array.from({ length: nClasses }, () => new Array(dim).fill(0));
  const counts = new Array(nClasses).fill(0);
  for (let i = 0; i < features.length; i++) {
    const k = labels[i];
    counts[k] += 1;
    for (let j = 0; j < dim; j++) {
      sums[k][j] += features[i][j];
    }
  }
  const weights: number[][] = [];
  const bias: number[] = [];
  for (let k = 0; k < nClasses; k++) {
    if (counts[k] === 0) {
      throw new Error(`centroid head: class ${k} has no training rows`);
    }
    const centroid = sums[k].map(v => v / counts[k]);
    let norm2 = 0;
    for (const v of centroid) {
      norm2 += v * v;
    }
    weights.push(centroid);
    bias.push(-norm2 / 2);
  }
  return new LinearHead(weights, bias);
}

function softmax(logits: number[]): number[] {
  const top = Math.max(...logits);
  const exps = logits.map(v => Math.exp(v - top));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map(v => v / total);
}

function accuracy(head: LinearHead, features: number[][], labels: number[]): number {
  let hits = 0;
  for (let i = 0; i < features.length; i++) {
    const logits = head.logits(features[i]);
    let best = 0;
    for (let k = 1; k < logits.length; k++) {
      if (logits[k] > logits[best]) {
        best = k;
      }
    }
    if (best === labels[i]) {
      hits += 1;
    }
  }
  return hits / features.length;
}

function cloneHead(weights: number[][], bias: number[]): LinearHead {
  return new LinearHead(weights.map(r => r.slice()), bias.slice());
}

/** Seeded SGD on the softmax cross-entropy; returns the best-epoch weights. */
export function trainSoftmaxHead(
  features: number[][],
  labels: number[],
  nClasses: number,
  config: TrainConfig
): TrainResult {
  const n = features.length;
  const dim = features[0].length;
  const valFraction = config.valFraction ?? 0.25;
  if (config.epochs < 1 || config.batchSize < 1 || !(config.learningRate > 0)) {
    throw new Error('training needs epochs >= 1, batchSize >= 1, learningRate > 0');
  }
  const nVal = Math.max(1, Math.floor(n * valFraction));
  if (nVal >= n) {
    throw new Error(`validation split would take all ${n} rows`);
  }
  const order = shuffled(n, deriveSeed(config.seed, 'split'));
  const valIdx = order.slice(0, nVal);
  const trainIdx = order.slice(nVal);
  const valX = valIdx.map(i => features[i]);
  const valY = valIdx.map(i => labels[i]);

  const weights: number[][] = Array.from({ length: nClasses }, () => new Array(dim).fill(0));
  const bias: number[] = new Array(nClasses).fill(0);
  let best = cloneHead(weights, bias);
  let bestAcc = -1;
  let bestEpoch = 0;
  const history: number[] = [];

  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const epochOrder = shuffled(trainIdx.length, deriveSeed(config.seed, `epoch-${epoch}`));
    for (let start = 0; start < trainIdx.length; start += config.batchSize) {
      const batch = epochOrder
        .slice(start, start + config.batchSize)
        .map(i => trainIdx[i]);
      const gradW: number[][] = Array.from({ length: nClasses }, () => new Array(dim).fill(0));
      const gradB: number[] = new Array(nClasses).fill(0);
      for (const i of batch) {
        const x = features[i];
        const probs = softmax(new LinearHead(weights, bias).logits(x));
        for (let k = 0; k < nClasses; k++) {
          const delta = (probs[k] - (k === labels[i] ? 1 : 0)) / batch.length;
          gradB[k] += delta;
          for (let j = 0; j < dim; j++) {
            gradW[k][j] += delta * x[j];
          }
        }
      }
      for (let k = 0; k < nClasses; k++) {
        bias[k] -= config.learningRate * gradB[k];
        for (let j = 0; j < dim; j++) {
          weights[k][j] -= config.learningRate * gradW[k][j];
        }
      }
    }
    const acc = accuracy(new LinearHead(weights, bias), valX, valY);
    history.push(acc);
    if (acc > bestAcc) {
      bestAcc = acc;
      bestEpoch = epoch;
      best = cloneHead(weights, bias);
    }
  }
  return { head: best, bestEpoch, valAccuracy: bestAcc, history };
}
