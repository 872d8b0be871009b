/**
 * Observation layout contract.
 *
 * The engine publishes a machine-readable schema (block names, offsets,
 * shapes, action/direction/style code tables) at creation time. The
 * bindings decode flat buffers purely through that schema rather than
 * duplicating any layout constant, so the engine remains the single
 * source of truth across the language boundary.
 */

import { GridRealmError } from "./errors.js";

export interface ObsBlockSpec {
  name: string;
  offset: number;
  length: number;
  shape: number[];
}

export interface ObservationSchema {
  version: number;
  dtype: string;
  byte_order: string;
  length: number;
  byte_length: number;
  blocks: ObsBlockSpec[];
  action_kinds: Record<string, number>;
  action_payload: Record<string, string[]>;
  directions: Record<string, number>;
  combat_styles: Record<string, number>;
}

export function validateSchema(schema: ObservationSchema): void {
  if (schema.dtype !== "float64" || schema.byte_order !== "little") {
    throw new GridRealmError(
      `unsupported observation encoding ${schema.dtype}/${schema.byte_order}`,
    );
  }
  if (schema.byte_length !== schema.length * 8) {
    throw new GridRealmError("schema byte_length disagrees with length");
  }
  let expected = 0;
  for (const block of schema.blocks) {
    if (block.offset !== expected) {
      throw new GridRealmError(`schema block ${block.name} is not contiguous`);
    }
    const count = block.shape.reduce((a, b) => a * b, 1);
    if (count !== block.length) {
      throw new GridRealmError(`schema block ${block.name} shape/length mismatch`);
    }
    expected += block.length;
  }
  if (expected !== schema.length) {
    throw new GridRealmError("schema blocks do not cover the buffer");
  }
}

/**
 * View raw little-endian bytes as a Float64Array without copying when the
 * buffer is 8-byte aligned, copying once otherwise.
 */
export function asFloat64(bytes: Uint8Array): Float64Array {
  if (bytes.byteLength % 8 !== 0) {
    throw new GridRealmError(
      `observation byte length ${bytes.byteLength} is not a multiple of 8`,
    );
  }
  if (bytes.byteOffset % 8 === 0) {
    return new Float64Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 8);
  }
  const copy = new Uint8Array(bytes.byteLength);
  copy.set(bytes);
  return new Float64Array(copy.buffer);
}

/** One named block of an observation: flat values plus the logical shape. */
export interface ObsBlock {
  values: Float64Array;
  shape: number[];
}

/**
 * Split one flat observation into its named blocks. The returned arrays
 * are subarray views over the input; no values are copied.
 */
export function decodeObservation(
  flat: Float64Array,
  schema: ObservationSchema,
): Record<string, ObsBlock> {
  if (flat.length !== schema.length) {
    throw new GridRealmError(
      `observation has ${flat.length} values, schema expects ${schema.length}`,
    );
  }
  const blocks: Record<string, ObsBlock> = {};
  for (const block of schema.blocks) {
    blocks[block.name] = {
      values: flat.subarray(block.offset, block.offset + block.length),
      shape: [...block.shape],
    };
  }
  return blocks;
}
