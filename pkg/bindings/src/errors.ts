/**
 * Error hierarchy for the bindings.
 *
 * Failures reported by the engine arrive as `{ok: false, error, message}`
 * replies; `errorFromReply` maps them onto typed classes so callers can
 * catch lifecycle misuse separately from transport failures.
 */

/** Base class for every error raised by this package. */
export class GridRealmError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** Handle misuse: step before reset, step after done, closed handle. */
export class LifecycleError extends GridRealmError {}

/** Environment creation failed: bad config path, bad config values. */
export class InitializationError extends GridRealmError {}

/** The bridge process died, closed, or spoke the protocol incorrectly. */
export class BridgeError extends GridRealmError {}

/** Engine-side failure that is not a lifecycle or creation problem. */
export class RemoteError extends GridRealmError {
  /** Exception class name reported by the engine. */
  readonly remoteName: string;

  constructor(remoteName: string, message: string) {
    super(`${remoteName}: ${message}`);
    this.remoteName = remoteName;
  }
}

export interface ErrorReply {
  ok: false;
  error: string;
  message: string;
}

export function isErrorReply(reply: unknown): reply is ErrorReply {
  return (
    typeof reply === "object" &&
    reply !== null &&
    (reply as { ok?: unknown }).ok === false
  );
}

/** Convert an error reply into the narrowest matching error class. */
export function errorFromReply(reply: ErrorReply, op: string): GridRealmError {
  const message = reply.message ?? "unknown engine error";
  if (reply.error === "LifecycleError") {
    return new LifecycleError(message);
  }
  if (op === "create") {
    return new InitializationError(`${reply.error}: ${message}`);
  }
  return new RemoteError(reply.error, message);
}
