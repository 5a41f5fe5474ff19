// End-to-end against the real session service: the client core drives a live
// WebSocket, replaying pointer positions straight from the catalog math.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { positionAt } from "../src/catalogMath.js";
import type { ShapeId } from "../src/protocol.js";
import { Screen, SessionClient } from "../src/session.js";

const REPO_ROOT = fileURLToPath(new URL("../..", import.meta.url));
const SAMPLE_STEP_MS = 1000 / 30;

let service: ChildProcess;
let webPort: number;
let storeDir: string;

function freePort(): Promise<number> {
    return new Promise((resolve, reject) => {
        const srv = createServer();
        srv.listen(0, "127.0.0.1", () => {
            const address = srv.address();
            if (address === null || typeof address === "string") {
                reject(new Error("no port"));
                return;
            }
            srv.close(() => resolve(address.port));
        });
    });
}

async function waitForService(port: number, timeoutMs = 20_000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
        const ok = await new Promise<boolean>((resolve) => {
            const probe = new WebSocket(`ws://127.0.0.1:${port}/ws`);
            probe.on("open", () => { probe.close(); resolve(true); });
            probe.on("error", () => resolve(false));
        });
        if (ok) return;
        await new Promise((r) => setTimeout(r, 200));
    }
    throw new Error("service did not come up");
}

class Harness {
    client!: SessionClient;
    socket!: WebSocket;
    screens: Screen[] = [];
    rawMessages: string[] = [];
    private waiters: { pred: (s: Screen) => boolean; resolve: (s: Screen) => void }[] = [];
    enrolled: string[] = [];

    async connect(port: number): Promise<void> {
        this.socket = new WebSocket(`ws://127.0.0.1:${port}/ws`);
        await new Promise<void>((resolve, reject) => {
            this.socket.on("open", () => resolve());
            this.socket.on("error", reject);
        });
        this.client = new SessionClient(
            {
                send: (data) => this.socket.send(data),
                close: () => this.socket.close(),
            },
            {
                onScreen: (screen) => {
                    this.screens.push(screen);
                    this.waiters = this.waiters.filter((w) => {
                        if (w.pred(screen)) {
                            w.resolve(screen);
                            return false;
                        }
                        return true;
                    });
                },
                onEnrolled: (user) => this.enrolled.push(user),
            },
        );
        this.socket.on("message", (data) => {
            const raw = String(data);
            this.rawMessages.push(raw);
            this.client.handleRaw(raw);
        });
        this.socket.on("close", () => this.client.onDisconnect());
    }

    waitForScreen(pred: (s: Screen) => boolean, timeoutMs = 15_000): Promise<Screen> {
        const hit = [...this.screens].reverse().find(pred);
        if (hit) return Promise.resolve(hit);
        return new Promise((resolve, reject) => {
            const timer = setTimeout(
                () => reject(new Error(`timed out; screens: ${
                    JSON.stringify(this.screens.map((s) => s.kind))}`)),
                timeoutMs,
            );
            this.waiters.push({
                pred,
                resolve: (s) => { clearTimeout(timer); resolve(s); },
            });
        });
    }

    /** Replay a perfect pursuit of one shape through the pointer pipe. */
    followShape(shapeId: ShapeId): void {
        const catalog = this.client.catalog!;
        const shape = catalog.shapes.find((s) => s.id === shapeId)!;
        const duration = catalog.frameDurationMs;
        for (let t = 0; t <= duration; t += SAMPLE_STEP_MS) {
            const u = Math.min(t / duration, 1);
            const [x, y] = positionAt(shape, u);
            this.client.pushPointer(t, x, y);
        }
        this.client.endFrame();
    }

    async authenticate(user: string, follow: ShapeId[]): Promise<boolean> {
        this.client.startSession(user);
        for (let i = 0; i < follow.length; i++) {
            await this.waitForScreen(
                (s) => s.kind === "auth-canvas" && s.frameIndex === i + 1,
            );
            this.followShape(follow[i]!);
        }
        const result = await this.waitForScreen((s) => s.kind === "result");
        return (result as { kind: "result"; granted: boolean }).granted;
    }

    close(): void {
        this.socket.close();
    }
}

beforeAll(async () => {
    storeDir = mkdtempSync(join(tmpdir(), "gazeauth-e2e-"));
    const tcpPort = await freePort();
    webPort = await freePort();
    service = spawn("python3", [
        "-m", "gazeauth.cli", "serve",
        "--port", String(tcpPort),
        "--web-port", String(webPort),
        "--store", storeDir,
    ], { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] });
    service.stderr?.on("data", (d) => process.stderr.write(String(d)));
    await waitForService(webPort);
}, 30_000);

afterAll(() => {
    service?.kill();
    rmSync(storeDir, { recursive: true, force: true });
});

describe("browser client against the live service", () => {
    it("grants when the pointer follows the enrolled triple", async () => {
        const harness = new Harness();
        await harness.connect(webPort);
        harness.client.hello();
        await harness.waitForScreen((s) => s.kind === "password-selection");
        expect(harness.client.catalog?.shapes).toHaveLength(12);

        harness.client.enroll("alice", ["l", "e", "c"]);
        const granted = await harness.authenticate("alice", ["l", "e", "c"]);
        expect(granted).toBe(true);
        harness.close();
    }, 30_000);

    it("denies a wrong shape on one frame, with no frame-identifying feedback", async () => {
        const harness = new Harness();
        await harness.connect(webPort);
        harness.client.hello();
        await harness.waitForScreen((s) => s.kind === "password-selection");

        harness.client.enroll("bob", ["l", "e", "c"]);
        const granted = await harness.authenticate("bob", ["l", "a", "c"]);
        expect(granted).toBe(false);

        // the client reached a clean result screen (so every message passed
        // conformance), and nothing on the wire singles out a frame
        for (const raw of harness.rawMessages) {
            const msg = JSON.parse(raw);
            if (msg.type === "auth_result") {
                expect(Object.keys(msg).sort()).toEqual(["granted", "type"]);
            }
            expect(raw).not.toMatch(/classif|mismatch|reject/i);
        }
        harness.close();
    }, 30_000);

    it("fails soft when the connection drops mid-session", async () => {
        const harness = new Harness();
        await harness.connect(webPort);
        harness.client.hello();
        await harness.waitForScreen((s) => s.kind === "password-selection");
        harness.client.enroll("carol", ["a", "b", "c"]);
        harness.client.startSession("carol");
        await harness.waitForScreen((s) => s.kind === "auth-canvas");
        harness.socket.close();
        const failure = await harness.waitForScreen((s) => s.kind === "failure");
        expect(failure.kind).toBe("failure");
    }, 30_000);
});
