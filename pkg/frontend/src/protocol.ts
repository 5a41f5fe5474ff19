// Wire protocol: JSON payloads shared by the TCP and WebSocket transports.

export type ShapeId =
    | "a" | "b" | "c" | "d" | "e" | "f"
    | "g" | "h" | "i" | "j" | "k" | "l";

export const SHAPE_IDS: ShapeId[] = [
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l",
];

export interface HelloMsg { type: "hello"; }
export interface EnrollMsg {
    type: "enroll";
    user: string;
    triple: [ShapeId, ShapeId, ShapeId];
    algorithm?: "template" | "dtree";
}
export interface SessionStartMsg {
    type: "session_start";
    user: string;
    algorithm?: "template" | "dtree";
}
export interface GazePointMsg {
    type: "gaze_point";
    nonce: string;
    t: number;
    x: number;
    y: number;
}
export interface FrameEndMsg { type: "frame_end"; nonce: string; }

export type ClientMessage =
    | HelloMsg | EnrollMsg | SessionStartMsg | GazePointMsg | FrameEndMsg;

export interface HelloReply { type: "hello"; protocol: number; catalog: unknown; }
export interface EnrollOk { type: "enroll_ok"; user: string; }
export interface FrameBegin {
    type: "frame_begin";
    nonce: string;
    frame_index: number;
    frame_duration_ms: number;
    catalog_version: string;
}
export interface FrameAck { type: "frame_ack"; frame_index: number; }
export interface AuthResult { type: "auth_result"; granted: boolean; }
export interface ErrorMsg { type: "error"; code: string; message: string; }

export type ServerMessage =
    | HelloReply | EnrollOk | FrameBegin | FrameAck | AuthResult | ErrorMsg;

const SERVER_TYPES = new Set([
    "hello", "enroll_ok", "frame_begin", "frame_ack", "auth_result", "error",
]);

// Fields each server message may carry. Anything beyond these (a shape id, a
// distance, a per-frame verdict) would leak classification state to the
// screen, so the client refuses it outright.
const ALLOWED_KEYS: Record<string, Set<string>> = {
    hello: new Set(["type", "protocol", "catalog"]),
    enroll_ok: new Set(["type", "user"]),
    frame_begin: new Set([
        "type", "nonce", "frame_index", "frame_duration_ms", "catalog_version",
    ]),
    frame_ack: new Set(["type", "frame_index"]),
    auth_result: new Set(["type", "granted"]),
    error: new Set(["type", "code", "message"]),
};

export function parseServerMessage(raw: string): ServerMessage {
    let value: unknown;
    try {
        value = JSON.parse(raw);
    } catch {
        throw new Error("server sent a non-JSON message");
    }
    if (typeof value !== "object" || value === null) {
        throw new Error("server message is not an object");
    }
    const msg = value as Record<string, unknown>;
    if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
        throw new Error(`unexpected server message type ${String(msg.type)}`);
    }
    const allowed = ALLOWED_KEYS[msg.type]!;
    for (const key of Object.keys(msg)) {
        if (!allowed.has(key)) {
            throw new Error(
                `server message ${msg.type} carries unexpected field ${key}`,
            );
        }
    }
    return msg as unknown as ServerMessage;
}
