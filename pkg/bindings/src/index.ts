export { BridgeClient, PROTOCOL_VERSION } from "./client.js";
export type { BridgeClientOptions } from "./client.js";
export { EnvHandle } from "./env.js";
export type {
  ActionInput,
  ActionMap,
  CreateOptions,
  ResetResult,
  StepResult,
} from "./env.js";
export {
  BridgeError,
  GridRealmError,
  InitializationError,
  LifecycleError,
  RemoteError,
} from "./errors.js";
export { encodeFrame, FrameDecoder } from "./frames.js";
export { FormatError, parseObsDump, parseReplay } from "./native.js";
export type {
  ActionTriple,
  ObsDump,
  ObsDumpHeader,
  Replay,
  ReplayHeader,
  ReplayTick,
} from "./native.js";
export { asFloat64, decodeObservation, validateSchema } from "./schema.js";
export type {
  ObsBlock,
  ObsBlockSpec,
  ObservationSchema,
} from "./schema.js";
