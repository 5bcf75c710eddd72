import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterEach, beforeEach, describe, expect, test } from 'vitest';

import {
  HEADER_SIZE,
  MAGIC_FEATURES,
  MAGIC_LABELS,
  MAGIC_LOGITS,
  PackError,
  readPack,
  writeFeaturePack,
  writeLabelPack,
  writeLogitPack,
} from '../src/packs';

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'packs-'));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

// 25-byte header + four float32 values, transcribed by hand from the layout
const GOLDEN_FEATURES = Buffer.from([
  0x46, 0x4c, 0x54, 0x53, // "FLTS"
  0x01, 0x00, 0x00, 0x00, // version 1
  0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // n_rows 2
  0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // dim 2
  0x00, // dtype real32
  0x00, 0x00, 0xc0, 0x3f, // 1.5
  0x00, 0x00, 0x00, 0xc0, // -2.0
  0x00, 0x00, 0x80, 0x3e, // 0.25
  0x00, 0x00, 0x40, 0x40, // 3.0
]);

describe('binary layout', () => {
  test('feature pack bytes match the hand-built golden file', () => {
    const target = path.join(dir, 'g.flts');
    writeFeaturePack(target, [
      [1.5, -2.0],
      [0.25, 3.0],
    ]);
    expect(fs.readFileSync(target).equals(GOLDEN_FEATURES)).toBe(true);
  });

  test('header size is 25 bytes', () => {
    expect(HEADER_SIZE).toBe(25);
    expect(GOLDEN_FEATURES.length).toBe(25 + 4 * 4);
  });

  test('logit and label packs differ from features only in magic', () => {
    const lg = path.join(dir, 'g.fltg');
    writeLogitPack(lg, [
      [1.5, -2.0],
      [0.25, 3.0],
    ]);
    const logitBytes = fs.readFileSync(lg);
    expect(logitBytes.toString('ascii', 0, 4)).toBe(MAGIC_LOGITS);
    expect(logitBytes.subarray(4).equals(GOLDEN_FEATURES.subarray(4))).toBe(true);

    const lb = path.join(dir, 'g.fltl');
    writeLabelPack(lb, [0, 0, 1, 1]);
    const labelBytes = fs.readFileSync(lb);
    expect(labelBytes.toString('ascii', 0, 4)).toBe(MAGIC_LABELS);
    expect(labelBytes.readBigUInt64LE(8)).toBe(4n);
    expect(labelBytes.readBigUInt64LE(16)).toBe(1n);
  });

  test('writes are byte-stable across calls', () => {
    const a = path.join(dir, 'a.flts');
    const b = path.join(dir, 'b.flts');
    const rows = [
      [0.1, 0.2, 0.3],
      [-1 / 3, 2 / 7, 1e-20],
    ];
    writeFeaturePack(a, rows);
    writeFeaturePack(b, rows);
    expect(fs.readFileSync(a).equals(fs.readFileSync(b))).toBe(true);
  });

  test('no temp files survive a write', () => {
    writeFeaturePack(path.join(dir, 'x.flts'), [[1, 2]]);
    writeLabelPack(path.join(dir, 'y.fltl'), [0, 0, 1, 1]);
    expect(fs.readdirSync(dir).sort()).toEqual(['x.flts', 'y.fltl']);
  });
});

describe('round trips', () => {
  test('feature values come back float32-exact', () => {
    const target = path.join(dir, 'r.flts');
    const rows = [
      [1 / 3, -0.7, 2.5],
      [1e-8, 3.25, -4],
    ];
    writeFeaturePack(target, rows);
    const pack = readPack(target);
    expect(pack.magic).toBe(MAGIC_FEATURES);
    expect(pack.nRows).toBe(2);
    expect(pack.dim).toBe(3);
    for (let i = 0; i < rows.length; i++) {
      for (let j = 0; j < rows[i].length; j++) {
        expect(pack.values[i][j]).toBe(Math.fround(rows[i][j]));
      }
    }
  });

  test('labels come back as exact integers', () => {
    const target = path.join(dir, 'r.fltl');
    writeLabelPack(target, [0, 1, 2, 2, 1, 0]);
    const pack = readPack(target);
    expect(pack.values.map(r => r[0])).toEqual([0, 1, 2, 2, 1, 0]);
  });
});

describe('validation', () => {
  test('feature packs need dim >= 2', () => {
    expect(() => writeFeaturePack(path.join(dir, 'x'), [[1], [2]])).toThrow(PackError);
  });

  test('logit packs need at least 2 classes', () => {
    expect(() => writeLogitPack(path.join(dir, 'x'), [[1], [2]])).toThrow(/2 classes/);
  });

  test('non-finite values are rejected', () => {
    expect(() => writeFeaturePack(path.join(dir, 'x'), [[1, Infinity]])).toThrow(/non-finite/);
    expect(() => writeLogitPack(path.join(dir, 'x'), [[NaN, 0]])).toThrow(/non-finite/);
  });

  test('float32 overflow counts as non-finite', () => {
    expect(() => writeFeaturePack(path.join(dir, 'x'), [[1e39, 0]])).toThrow(/non-finite/);
  });

  test('ragged rows are rejected', () => {
    expect(() => writeFeaturePack(path.join(dir, 'x'), [[1, 2], [3]])).toThrow(/row 1/);
  });

  test('label rules: integral, non-negative, every class twice', () => {
    expect(() => writeLabelPack(path.join(dir, 'x'), [0.5, 1, 1, 0])).toThrow(/non-integral/);
    expect(() => writeLabelPack(path.join(dir, 'x'), [-1, 0, 0])).toThrow(/negative/);
    expect(() => writeLabelPack(path.join(dir, 'x'), [0, 0, 2, 2])).toThrow(/class 1 has 0/);
    expect(() => writeLabelPack(path.join(dir, 'x'), [0, 0, 1])).toThrow(/class 1 has 1/);
    expect(() => writeLabelPack(path.join(dir, 'x'), [])).toThrow(PackError);
  });

  test('empty matrices are rejected', () => {
    expect(() => writeFeaturePack(path.join(dir, 'x'), [])).toThrow(PackError);
  });

  test('reader refuses foreign bytes', () => {
    const target = path.join(dir, 'junk');
    fs.writeFileSync(target, 'f0,f1\n1,2\n');
    expect(() => readPack(target)).toThrow(/magic|truncated/);
  });
});
