// extract.ts - the job runner: text collections in, packs plus manifest out.
//
// One job produces, inside the output directory:
//   ind_train.flts / ind_test.flts / ood_test.flts / aux_ood.flts
//   logits_ind_test.fltg / logits_ood_test.fltg
//   labels_train.fltl
//   classes.json      (index i holds the label name for class id i)
//   manifest.json     (written last; role paths are relative to itself)
//
// Class ids are assigned by sorting the distinct train labels, so the
// id mapping is stable across runs and machines. Every output is a pure
// function of the job, so rerunning the same job yields byte-identical
// files; nothing here stamps times or hostnames.

import * as fs from 'node:fs';
import * as path from 'node:path';

import { centroidHead, trainSoftmaxHead, LinearHead } from './classifier';
import { resolveDataset, sampleSentences, DatasetError } from './datasets';
import { SequenceEncoder } from './encoder';
import { atomicWriteFile, writeFeaturePack, writeLabelPack, writeLogitPack } from './packs';
import { deriveSeed } from './rng';

export interface ExtractJob {
  dataset: string;
  dataRoot?: string;
  indTrainPath?: string;
  indTestPath?: string;
  oodTestPath?: string;
  auxPath?: string;
  checkpoint: string;
  fineTune: boolean;
  epochs: number;
  learningRate: number;
  batchSize: number;
  auxSample: number;
  meanPool: boolean;
  dim: number;
  outDir: string;
  seed: number;
  k?: number;
  alpha?: number;
}

export const JOB_DEFAULTS = {
  dataset: 'custom',
  checkpoint: 'tiny-rnn-v1',
  fineTune: false,
  epochs: 5,
  learningRate: 2e-5,
  batchSize: 16,
  auxSample: 50000,
  meanPool: false,
  dim: 32,
  seed: 0,
};

export interface ExtractSummary {
  manifestPath: string;
  outDir: string;
  dim: number;
  classes: string[];
  rows: Record<string, number>;
  bestEpoch?: number;
  valAccuracy?: number;
}

function buildClassMap(labels: string[]): Map<string, number> {
  const names = Array.from(new Set(labels)).sort();
  if (names.length < 2) {
    throw new DatasetError(`need at least 2 classes in the train split, got ${names.length}`);
  }
  return new Map(names.map((name, i) => [name, i]));
}

export function runExtract(job: ExtractJob): ExtractSummary {
  const data = resolveDataset(job);
  const classMap = buildClassMap(data.indTrain.map(e => e.label));
  const classes = Array.from(classMap.keys());
  const trainLabels = data.indTrain.map(e => classMap.get(e.label)!);
  for (const [name, id] of classMap) {
    const count = trainLabels.filter(v => v === id).length;
    if (count < 2) {
      throw new DatasetError(`class ${JSON.stringify(name)} has ${count} train sentences, need >= 2`);
    }
  }

  const seed = BigInt(job.seed);
  const aux = sampleSentences(data.aux, job.auxSample, deriveSeed(seed, 'aux'));

  const encoder = new SequenceEncoder({
    checkpoint: job.checkpoint,
    dim: job.dim,
    meanPool: job.meanPool,
  });
  const featIndTrain = encoder.encodeAll(data.indTrain.map(e => e.text));
  const featIndTest = encoder.encodeAll(data.indTest.map(e => e.text));
  const featOodTest = encoder.encodeAll(data.oodTest);
  const featAux = encoder.encodeAll(aux);

  // every pack of one job must share one width; refuse to emit otherwise
  const widths = new Map<string, number>([
    ['ind_train', featIndTrain[0].length],
    ['ind_test', featIndTest[0].length],
    ['ood_test', featOodTest[0].length],
    ['aux_ood', featAux[0].length],
  ]);
  for (const [role, width] of widths) {
    if (width !== job.dim) {
      throw new Error(`dim drift: role ${role} produced width ${width}, job declares ${job.dim}`);
    }
  }

  let head: LinearHead;
  let bestEpoch: number | undefined;
  let valAccuracy: number | undefined;
  if (job.fineTune) {
    const result = trainSoftmaxHead(featIndTrain, trainLabels, classes.length, {
      epochs: job.epochs,
      learningRate: job.learningRate,
      batchSize: job.batchSize,
      seed: deriveSeed(seed, 'train'),
    });
    head = result.head;
    bestEpoch = result.bestEpoch;
    valAccuracy = result.valAccuracy;
  } else {
    head = centroidHead(featIndTrain, trainLabels, classes.length);
  }
  const logitsIndTest = head.logitsAll(featIndTest);
  const logitsOodTest = head.logitsAll(featOodTest);

  fs.mkdirSync(job.outDir, { recursive: true });
  const out = (name: string) => path.join(job.outDir, name);
  writeFeaturePack(out('ind_train.flts'), featIndTrain);
  writeFeaturePack(out('ind_test.flts'), featIndTest);
  writeFeaturePack(out('ood_test.flts'), featOodTest);
  writeFeaturePack(out('aux_ood.flts'), featAux);
  writeLogitPack(out('logits_ind_test.fltg'), logitsIndTest);
  writeLogitPack(out('logits_ood_test.fltg'), logitsOodTest);
  writeLabelPack(out('labels_train.fltl'), trainLabels);
  atomicWriteFile(out('classes.json'), JSON.stringify({ classes }, null, 2) + '\n');

  const manifest: Record<string, unknown> = {
    ind_train: 'ind_train.flts',
    ind_test: 'ind_test.flts',
    ood_test: 'ood_test.flts',
    aux_ood: 'aux_ood.flts',
    logits_ind_test: 'logits_ind_test.fltg',
    logits_ood_test: 'logits_ood_test.fltg',
    labels_train: 'labels_train.fltl',
    dim: job.dim,
  };
  if (job.k !== undefined) {
    manifest.k = job.k;
  }
  if (job.alpha !== undefined) {
    manifest.alpha = job.alpha;
  }
  manifest.provenance = {
    tool: 'embed-extract 0.1.0',
    dataset: job.dataset,
    checkpoint: job.checkpoint,
    seed: job.seed,
    fine_tune: job.fineTune,
    mean_pool: job.meanPool,
    epochs: job.fineTune ? job.epochs : undefined,
    learning_rate: job.fineTune ? job.learningRate : undefined,
    batch_size: job.fineTune ? job.batchSize : undefined,
    best_epoch: bestEpoch,
    aux_sample_requested: job.auxSample,
    aux_rows: featAux.length,
    classes: classes.length,
  };
  const manifestPath = out('manifest.json');
  atomicWriteFile(manifestPath, JSON.stringify(manifest, null, 2) + '\n');

  return {
    manifestPath,
    outDir: job.outDir,
    dim: job.dim,
    classes,
    rows: {
      ind_train: featIndTrain.length,
      ind_test: featIndTest.length,
      ood_test: featOodTest.length,
      aux_ood: featAux.length,
    },
    bestEpoch,
    valAccuracy,
  };
}
