// packs.ts - writers and readers for the FLTS/FLTG/FLTL binary containers.
//
// On-disk layout, shared by all three kinds (little-endian throughout):
//
//   offset  size  field
//   0       4     magic: "FLTS" features, "FLTG" logits, "FLTL" labels
//   4       4     format version, u32, currently 1
//   8       8     n_rows, u64
//   16      8     dim (columns), u64
//   24      1     dtype tag, u8, 0 = real32
//   25      -     payload, float32, row-major
//
// Consumers validate per kind: feature packs need dim >= 2 on disk, logit
// packs need at least 2 classes, label packs are one column of non-negative
// integral class ids where every id up to the maximum occurs at least twice.
// The writers here enforce the same rules up front so an emitted file is
// loadable with zero warnings on the other side.
//
// Writers are byte-stable (one matrix, one byte sequence) and atomic: bytes
// land in a temp file that is renamed into place, so a crash cannot leave a
// half-written pack behind.

import * as fs from 'node:fs';
import * as path from 'node:path';

export const MAGIC_FEATURES = 'FLTS';
export const MAGIC_LOGITS = 'FLTG';
export const MAGIC_LABELS = 'FLTL';
export const HEADER_SIZE = 25;

const FORMAT_VERSION = 1;
const DTYPE_REAL32 = 0;

export class PackError extends Error {}

export interface PackContents {
  magic: string;
  version: number;
  nRows: number;
  dim: number;
  values: number[][];
}

function toFloat32Rows(rows: number[][], context: string): { flat: Float32Array; dim: number } {
  if (rows.length < 1) {
    throw new PackError(`${context}: need at least one row`);
  }
  const dim = rows[0].length;
  if (dim < 1) {
    throw new PackError(`${context}: need at least one column`);
  }
  const flat = new Float32Array(rows.length * dim);
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].length !== dim) {
      throw new PackError(`${context}: row ${i} has ${rows[i].length} columns, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      const v = Math.fround(rows[i][j]);
      if (!Number.isFinite(v)) {
        throw new PackError(`${context}: non-finite value at row ${i}, col ${j}`);
      }
      flat[i * dim + j] = v;
    }
  }
  return { flat, dim };
}

function encodePack(magic: string, flat: Float32Array, nRows: number, dim: number): Buffer {
  const buf = Buffer.alloc(HEADER_SIZE + flat.length * 4);
  buf.write(magic, 0, 'ascii');
  buf.writeUInt32LE(FORMAT_VERSION, 4);
  buf.writeBigUInt64LE(BigInt(nRows), 8);
  buf.writeBigUInt64LE(BigInt(dim), 16);
  buf.writeUInt8(DTYPE_REAL32, 24);
  for (let i = 0; i < flat.length; i++) {
    buf.writeFloatLE(flat[i], HEADER_SIZE + i * 4);
  }
  return buf;
}

/** Write bytes via a temp file in the same directory, then rename into place. */
export function atomicWriteFile(target: string, data: Buffer | string): void {
  const tmp = path.join(
    path.dirname(target),
    `.${path.basename(target)}.tmp-${process.pid}`
  );
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, target);
}

/** Write an n x m feature matrix; feature packs require m >= 2 on disk. */
export function writeFeaturePack(target: string, rows: number[][]): void {
  const { flat, dim } = toFloat32Rows(rows, 'feature pack');
  if (dim < 2) {
    throw new PackError(`feature pack: dim >= 2 required on disk, got ${dim}`);
  }
  atomicWriteFile(target, encodePack(MAGIC_FEATURES, flat, rows.length, dim));
}

/** Write an n x K logit matrix; at least two classes per row. */
export function writeLogitPack(target: string, rows: number[][]): void {
  const { flat, dim } = toFloat32Rows(rows, 'logit pack');
  if (dim < 2) {
    throw new PackError(`logit pack: at least 2 classes required, got ${dim}`);
  }
  atomicWriteFile(target, encodePack(MAGIC_LOGITS, flat, rows.length, dim));
}

/** Write class ids as a single float32 column after validating the id range. */
export function writeLabelPack(target: string, labels: number[]): void {
  if (labels.length < 1) {
    throw new PackError('label pack: need at least one row');
  }
  const counts = new Map<number, number>();
  for (let i = 0; i < labels.length; i++) {
    const v = labels[i];
    if (!Number.isFinite(v) || !Number.isInteger(v)) {
      throw new PackError(`label pack: non-integral class id at row ${i}`);
    }
    if (v < 0) {
      throw new PackError(`label pack: negative class id at row ${i}`);
    }
    counts.set(v, (counts.get(v) ?? 0) + 1);
  }
  const nClasses = Math.max(...labels) + 1;
  for (let c = 0; c < nClasses; c++) {
    const n = counts.get(c) ?? 0;
    if (n < 2) {
      throw new PackError(`label pack: class ${c} has ${n} samples, need >= 2`);
    }
  }
  const { flat } = toFloat32Rows(labels.map(v => [v]), 'label pack');
  atomicWriteFile(target, encodePack(MAGIC_LABELS, flat, labels.length, 1));
}

/** Read any pack back; used for self-checks and round-trip tests. */
export function readPack(target: string): PackContents {
  const data = fs.readFileSync(target);
  if (data.length < HEADER_SIZE) {
    throw new PackError(`${target}: truncated header, ${data.length} bytes < ${HEADER_SIZE}`);
  }
  const magic = data.toString('ascii', 0, 4);
  if (magic !== MAGIC_FEATURES && magic !== MAGIC_LOGITS && magic !== MAGIC_LABELS) {
    throw new PackError(`${target}: unknown magic ${JSON.stringify(magic)}`);
  }
  const version = data.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new PackError(`${target}: unsupported format version ${version}`);
  }
  const nRows = Number(data.readBigUInt64LE(8));
  const dim = Number(data.readBigUInt64LE(16));
  const dtype = data.readUInt8(24);
  if (dtype !== DTYPE_REAL32) {
    throw new PackError(`${target}: unsupported dtype tag ${dtype}`);
  }
  if (data.length - HEADER_SIZE !== nRows * dim * 4) {
    throw new PackError(
      `${target}: header declares ${nRows}x${dim} but payload holds ${data.length - HEADER_SIZE} bytes`
    );
  }
  const values: number[][] = [];
  for (let i = 0; i < nRows; i++) {
    const row: number[] = [];
    for (let j = 0; j < dim; j++) {
      row.push(data.readFloatLE(HEADER_SIZE + (i * dim + j) * 4));
    }
    values.push(row);
  }
  return { magic, version, nRows, dim, values };
}
