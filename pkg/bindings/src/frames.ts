/**
 * Length-prefixed JSON framing for the bridge's stdio transport.
 *
 * Every message in either direction is a little-endian u32 byte length
 * followed by that many bytes of UTF-8 JSON.
 */

export function encodeFrame(message: unknown): Buffer {
  const body = Buffer.from(JSON.stringify(message), "utf-8");
  const frame = Buffer.allocUnsafe(4 + body.length);
  frame.writeUInt32LE(body.length, 0);
  body.copy(frame, 4);
  return frame;
}

/**
 * Incremental decoder: feed it stream chunks, get back every complete
 * frame contained so far. Partial frames are buffered across pushes.
 */
export class FrameDecoder {
  private pending: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): unknown[] {
    this.pending = this.pending.length === 0
      ? chunk
      : Buffer.concat([this.pending, chunk]);
    const frames: unknown[] = [];
    while (this.pending.length >= 4) {
      const length = this.pending.readUInt32LE(0);
      if (this.pending.length < 4 + length) {
        break;
      }
      const body = this.pending.subarray(4, 4 + length);
      frames.push(JSON.parse(body.toString("utf-8")));
      this.pending = this.pending.subarray(4 + length);
    }
    return frames;
  }

  /** Bytes buffered but not yet forming a complete frame. */
  get bufferedBytes(): number {
    return this.pending.length;
  }
}
