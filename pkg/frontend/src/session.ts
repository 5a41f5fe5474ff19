// Transport-agnostic session state machine. The browser feeds it a WebSocket;
// tests feed it mocks or a node ws client. It owns the pointer buffer, the
// enroll/authenticate flows, and the conformance rule that the server must
// never leak per-frame classification.

import type { Catalog } from "./catalogMath.js";
import { parseCatalog } from "./catalogMath.js";
import type { ClientMessage, ServerMessage, ShapeId } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export interface Transport {
    send(data: string): void;
    close(): void;
}

export type Screen =
    | { kind: "connecting" }
    | { kind: "password-selection" }
    | { kind: "auth-canvas"; frameIndex: number; frameDurationMs: number }
    | { kind: "result"; granted: boolean }
    | { kind: "failure"; detail: string };

export interface SessionEvents {
    onCatalog?(catalog: Catalog): void;
    onEnrolled?(user: string): void;
    onScreen?(screen: Screen): void;
    onServerError?(code: string, message: string): void;
}

export class SessionClient {
    catalog: Catalog | null = null;
    screen: Screen = { kind: "connecting" };
    /** Points of the frame currently being captured; cleared at frame_begin. */
    pointerBuffer: { t: number; x: number; y: number }[] = [];

    private nonce: string | null = null;
    private frameIndex = 0;
    private frameDurationMs = 0;
    private inSession = false;

    constructor(private transport: Transport, public events: SessionEvents = {}) {}

    private send(msg: ClientMessage): void {
        this.transport.send(JSON.stringify(msg));
    }

    private show(screen: Screen): void {
        this.screen = screen;
        this.events.onScreen?.(screen);
    }

    hello(): void {
        this.send({ type: "hello" });
    }

    enroll(user: string, triple: [ShapeId, ShapeId, ShapeId],
           algorithm?: "template" | "dtree"): void {
        this.send({ type: "enroll", user, triple, algorithm });
    }

    startSession(user: string, algorithm?: "template" | "dtree"): void {
        this.pointerBuffer = [];
        this.inSession = true;
        this.send({ type: "session_start", user, algorithm });
    }

    /** Stream one pointer sample; only valid while a frame is running. */
    pushPointer(t: number, x: number, y: number): void {
        if (!this.inSession || this.nonce === null) return;
        this.pointerBuffer.push({ t, x, y });
        this.send({ type: "gaze_point", nonce: this.nonce, t, x, y });
    }

    endFrame(): void {
        if (!this.inSession || this.nonce === null) return;
        this.send({ type: "frame_end", nonce: this.nonce });
    }

    get currentFrame(): number {
        return this.frameIndex;
    }

    get frameDuration(): number {
        return this.frameDurationMs;
    }

    handleRaw(raw: string): void {
        let msg: ServerMessage;
        try {
            msg = parseServerMessage(raw);
        } catch (err) {
            // Anything off-protocol (including a leaked classification field)
            // ends the attempt rather than being rendered.
            this.abort(`protocol violation: ${(err as Error).message}`);
            return;
        }
        this.handle(msg);
    }

    handle(msg: ServerMessage): void {
        switch (msg.type) {
            case "hello": {
                try {
                    this.catalog = parseCatalog(msg.catalog);
                } catch (err) {
                    this.abort(`bad catalog: ${(err as Error).message}`);
                    return;
                }
                this.events.onCatalog?.(this.catalog);
                this.show({ kind: "password-selection" });
                break;
            }
            case "enroll_ok":
                this.events.onEnrolled?.(msg.user);
                break;
            case "frame_begin": {
                if (this.catalog && msg.catalog_version !== this.catalog.version) {
                    this.abort(
                        `catalog version mismatch: server has ${msg.catalog_version}`,
                    );
                    return;
                }
                this.nonce = msg.nonce;
                this.frameIndex = msg.frame_index;
                this.frameDurationMs = msg.frame_duration_ms;
                this.pointerBuffer = [];
                this.show({
                    kind: "auth-canvas",
                    frameIndex: msg.frame_index,
                    frameDurationMs: msg.frame_duration_ms,
                });
                break;
            }
            case "frame_ack":
                break; // no per-frame outcome exists, by design
            case "auth_result":
                this.inSession = false;
                this.nonce = null;
                this.pointerBuffer = [];
                this.show({ kind: "result", granted: msg.granted });
                break;
            case "error":
                this.events.onServerError?.(msg.code, msg.message);
                if (this.inSession) {
                    this.abort(`server error ${msg.code}`);
                }
                break;
        }
    }

    /** Connection dropped or protocol broken: deny-style failure screen. */
    abort(detail: string): void {
        this.inSession = false;
        this.nonce = null;
        this.pointerBuffer = [];
        this.show({ kind: "failure", detail });
    }

    onDisconnect(): void {
        if (this.inSession) {
            this.abort("connection lost mid-session");
        }
    }
}
