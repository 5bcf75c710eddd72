#!/usr/bin/env node
// cli.ts - command-line front end for the extractor.
//
// Usage:
//   embed-extract --dataset custom --ind-train a.jsonl --ind-test b.jsonl \
//     --ood-test c.jsonl --aux d.txt --out outdir [--seed N] [--dim M] ...
//
// Exit codes: 0 success, 2 for unusable flags or unresolvable datasets,
// 1 for anything else.

import { parseArgs } from 'node:util';

import { DatasetError } from './datasets';
import { runExtract, ExtractJob, JOB_DEFAULTS } from './extract';

const USAGE = `embed-extract: turn labeled text splits into scored-toolkit packs

required:
  --out DIR                  output directory (created if missing)
  --dataset ID               clinc150 | rostd | banking77 | snips | custom
  with --dataset custom:     --ind-train --ind-test --ood-test --aux (paths)
  with a named dataset:      --data-root DIR holding <root>/<id>/...

optional:
  --checkpoint ID            encoder id (default ${JOB_DEFAULTS.checkpoint})
  --dim N                    feature width (default ${JOB_DEFAULTS.dim})
  --seed N                   run seed (default ${JOB_DEFAULTS.seed})
  --fine-tune                train the logit head instead of loading centroids
  --epochs N                 fine-tune epochs (default ${JOB_DEFAULTS.epochs})
  --learning-rate X          fine-tune step size (default ${JOB_DEFAULTS.learningRate})
  --batch-size N             fine-tune minibatch rows (default ${JOB_DEFAULTS.batchSize})
  --aux-sample N             aux sentences to keep (default ${JOB_DEFAULTS.auxSample})
  --mean-pool                pool token states instead of the end state
  --k N / --alpha X          defaults recorded in the manifest for scoring
`;

class UsageError extends Error {}

function intFlag(raw: string | undefined, name: string, fallback: number): number {
  if (raw === undefined) {
    return fallback;
  }
  const v = Number(raw);
  if (!Number.isInteger(v) || v < 0) {
    throw new UsageError(`--${name} needs a non-negative integer, got ${raw}`);
  }
  return v;
}

function floatFlag(raw: string | undefined, name: string, fallback: number): number {
  if (raw === undefined) {
    return fallback;
  }
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new UsageError(`--${name} needs a number, got ${raw}`);
  }
  return v;
}

function jobFromArgv(argv: string[]): ExtractJob {
  const { values } = parseArgs({
    args: argv,
    options: {
      dataset: { type: 'string' },
      'data-root': { type: 'string' },
      'ind-train': { type: 'string' },
      'ind-test': { type: 'string' },
      'ood-test': { type: 'string' },
      aux: { type: 'string' },
      checkpoint: { type: 'string' },
      'fine-tune': { type: 'boolean' },
      epochs: { type: 'string' },
      'learning-rate': { type: 'string' },
      'batch-size': { type: 'string' },
      'aux-sample': { type: 'string' },
      'mean-pool': { type: 'boolean' },
      dim: { type: 'string' },
      out: { type: 'string' },
      seed: { type: 'string' },
      k: { type: 'string' },
      alpha: { type: 'string' },
      help: { type: 'boolean' },
    },
  });
  if (values.help) {
    console.log(USAGE);
    process.exit(0);
  }
  if (!values.out) {
    throw new UsageError('--out is required');
  }
  if (!values.dataset) {
    throw new UsageError('--dataset is required');
  }
  return {
    dataset: values.dataset,
    dataRoot: values['data-root'],
    indTrainPath: values['ind-train'],
    indTestPath: values['ind-test'],
    oodTestPath: values['ood-test'],
    auxPath: values.aux,
    checkpoint: values.checkpoint ?? JOB_DEFAULTS.checkpoint,
    fineTune: values['fine-tune'] ?? JOB_DEFAULTS.fineTune,
    epochs: intFlag(values.epochs, 'epochs', JOB_DEFAULTS.epochs),
    learningRate: floatFlag(values['learning-rate'], 'learning-rate', JOB_DEFAULTS.learningRate),
    batchSize: intFlag(values['batch-size'], 'batch-size', JOB_DEFAULTS.batchSize),
    auxSample: intFlag(values['aux-sample'], 'aux-sample', JOB_DEFAULTS.auxSample),
    meanPool: values['mean-pool'] ?? JOB_DEFAULTS.meanPool,
    dim: intFlag(values.dim, 'dim', JOB_DEFAULTS.dim),
    outDir: values.out,
    seed: intFlag(values.seed, 'seed', JOB_DEFAULTS.seed),
    k: values.k === undefined ? undefined : intFlag(values.k, 'k', 0),
    alpha: values.alpha === undefined ? undefined : floatFlag(values.alpha, 'alpha', 0),
  };
}

async function main() {
  let job: ExtractJob;
  try {
    job = jobFromArgv(process.argv.slice(2));
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    console.error(USAGE);
    process.exit(2);
  }
  try {
    const summary = runExtract(job);
    console.log(`encoded with checkpoint ${job.checkpoint} (dim ${job.dim}, seed ${job.seed})`);
    for (const [role, n] of Object.entries(summary.rows)) {
      console.log(`  ${role}: ${n} rows`);
    }
    console.log(`  classes: ${summary.classes.join(', ')}`);
    if (summary.bestEpoch !== undefined) {
      console.log(`  fine-tune kept epoch ${summary.bestEpoch} (val accuracy ${summary.valAccuracy})`);
    }
    console.log(`manifest written to ${summary.manifestPath}`);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    process.exit(e instanceof DatasetError ? 2 : 1);
  }
}

main().catch(e => {
  console.error(e);
  process.exit(1);
});
