// datasets.ts - resolving a dataset id to the four text collections.
//
// Named ids resolve under a data root laid out as
//   <root>/<id>/ind_train.jsonl
//   <root>/<id>/ind_test.jsonl
//   <root>/<id>/ood_test.jsonl
//   <root>/<id>/aux.txt
// and the "custom" id takes the four paths directly. Labeled splits are
// JSONL, one {"text": ..., "label": ...} object per line. Unlabeled
// collections (OOD test, aux corpus) accept either JSONL with a text field
// or plain text with one sentence per line.

import * as fs from 'node:fs';
import * as path from 'node:path';

import { splitmix64 } from './rng';

export const NAMED_DATASETS = ['clinc150', 'rostd', 'banking77', 'snips'];

export class DatasetError extends Error {}

export interface LabeledExample {
  text: string;
  label: string;
}

export interface ResolvedDataset {
  indTrain: LabeledExample[];
  indTest: LabeledExample[];
  oodTest: string[];
  aux: string[];
}

export interface DatasetRequest {
  dataset: string;
  dataRoot?: string;
  indTrainPath?: string;
  indTestPath?: string;
  oodTestPath?: string;
  auxPath?: string;
}

function readLines(target: string): string[] {
  let raw: string;
  try {
    raw = fs.readFileSync(target, 'utf8');
  } catch (e) {
    throw new DatasetError(`cannot read ${target}: ${(e as Error).message}`);
  }
  return raw.split('\n').map(l => l.trim()).filter(l => l.length > 0);
}

/** JSONL of {"text", "label"} objects; both fields required per line. */
export function loadLabeledJsonl(target: string): LabeledExample[] {
  const out: LabeledExample[] = [];
  const lines = readLines(target);
  for (let i = 0; i < lines.length; i++) {
    let obj: any;
    try {
      obj = JSON.parse(lines[i]);
    } catch {
      throw new DatasetError(`${target}: line ${i + 1} is not valid JSON`);
    }
    if (typeof obj?.text !== 'string' || typeof obj?.label !== 'string') {
      throw new DatasetError(`${target}: line ${i + 1} needs string "text" and "label" fields`);
    }
    out.push({ text: obj.text, label: obj.label });
  }
  if (out.length === 0) {
    throw new DatasetError(`${target}: no examples found`);
  }
  return out;
}

/** JSONL with a text field, or plain text one sentence per line. */
export function loadSentences(target: string): string[] {
  const lines = readLines(target);
  const out: string[] = [];
  for (let i = 0; i < lines.length; i++) {
    if (lines[i].startsWith('{')) {
      let obj: any;
      try {
        obj = JSON.parse(lines[i]);
      } catch {
        throw new DatasetError(`${target}: line ${i + 1} is not valid JSON`);
      }
      if (typeof obj?.text !== 'string') {
        throw new DatasetError(`${target}: line ${i + 1} needs a string "text" field`);
      }
      out.push(obj.text);
    } else {
      out.push(lines[i]);
    }
  }
  if (out.length === 0) {
    throw new DatasetError(`${target}: no sentences found`);
  }
  return out;
}

/** Uniform sample of `size` sentences without replacement, fixed by seed. */
export function sampleSentences(sentences: string[], size: number, seed: bigint): string[] {
  if (size < 1) {
    throw new DatasetError(`aux sample size must be >= 1, got ${size}`);
  }
  if (size >= sentences.length) {
    return sentences.slice();
  }
  // partial Fisher-Yates: after `size` swaps the head holds the sample
  const pool = sentences.slice();
  for (let i = 0; i < size; i++) {
    const j = i + Number(splitmix64(seed, i) % BigInt(pool.length - i));
    const tmp = pool[i];
    pool[i] = pool[j];
    pool[j] = tmp;
  }
  return pool.slice(0, size);
}

export function resolveDataset(request: DatasetRequest): ResolvedDataset {
  let paths: { indTrain: string; indTest: string; oodTest: string; aux: string };
  if (request.dataset === 'custom') {
    const missing: string[] = [];
    if (!request.indTrainPath) missing.push('ind-train');
    if (!request.indTestPath) missing.push('ind-test');
    if (!request.oodTestPath) missing.push('ood-test');
    if (!request.auxPath) missing.push('aux');
    if (missing.length) {
      throw new DatasetError(`custom dataset needs explicit paths for: ${missing.join(', ')}`);
    }
    paths = {
      indTrain: request.indTrainPath!,
      indTest: request.indTestPath!,
      oodTest: request.oodTestPath!,
      aux: request.auxPath!,
    };
  } else if (NAMED_DATASETS.includes(request.dataset)) {
    if (!request.dataRoot) {
      throw new DatasetError(`dataset ${request.dataset} needs --data-root pointing at the corpus layout`);
    }
    const base = path.join(request.dataRoot, request.dataset);
    if (!fs.existsSync(base)) {
      throw new DatasetError(`dataset ${request.dataset} not found under ${request.dataRoot}`);
    }
    paths = {
      indTrain: path.join(base, 'ind_train.jsonl'),
      indTest: path.join(base, 'ind_test.jsonl'),
      oodTest: path.join(base, 'ood_test.jsonl'),
      aux: path.join(base, 'aux.txt'),
    };
  } else {
    throw new DatasetError(
      `unknown dataset id ${JSON.stringify(request.dataset)}; expected one of ${NAMED_DATASETS.join(', ')} or custom`
    );
  }
  return {
    indTrain: loadLabeledJsonl(paths.indTrain),
    indTest: loadLabeledJsonl(paths.indTest),
    oodTest: loadSentences(paths.oodTest),
    aux: loadSentences(paths.aux),
  };
}
