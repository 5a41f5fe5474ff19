// DOM glue: screen construction and the live canvas loop.

import type { Catalog } from "./catalogMath.js";
import { PointerSampler, browserScheduler, runFrame } from "./loop.js";
import type { ShapeId } from "./protocol.js";
import { renderFrame } from "./render.js";
import type { Screen, SessionClient } from "./session.js";

type Triple = [ShapeId, ShapeId, ShapeId];

export class App {
    private root: HTMLElement;
    private scheduler = browserScheduler();
    private sampler: PointerSampler | null = null;
    private canvas: HTMLCanvasElement | null = null;
    private catalog: Catalog | null = null;
    private picks: (ShapeId | null)[] = [null, null, null];
    private user = "";
    private frameToken = 0;

    constructor(private client: SessionClient, root: HTMLElement) {
        this.root = root;
    }

    setCatalog(catalog: Catalog): void {
        this.catalog = catalog;
    }

    show(screen: Screen): void {
        switch (screen.kind) {
            case "connecting":
                this.root.innerHTML = "<p class='status'>connecting…</p>";
                break;
            case "password-selection":
                this.renderPasswordSelection();
                break;
            case "auth-canvas":
                this.renderAuthCanvas(screen.frameIndex, screen.frameDurationMs);
                break;
            case "result":
                this.renderResult(screen.granted);
                break;
            case "failure":
                this.renderFailure(screen.detail);
                break;
        }
    }

    private renderPasswordSelection(): void {
        this.stopFrame();
        const catalog = this.catalog;
        if (!catalog) return;
        this.root.innerHTML = "";
        const panel = document.createElement("div");
        panel.className = "panel";
        panel.innerHTML = `
            <h1>gazeauth</h1>
            <p>Pick one shape per column — that ordered triple is your
            password. Then follow each chosen shape with the pointer, one per
            frame.</p>
            <label>user <input id="user" type="text" placeholder="alice"></label>
            <div class="columns"></div>
            <div class="actions">
                <button id="enroll" disabled>enroll</button>
                <button id="authenticate" disabled>authenticate</button>
            </div>
            <p class="status" id="status"></p>`;
        this.root.appendChild(panel);

        const columns = panel.querySelector(".columns")!;
        for (let col = 0; col < 3; col++) {
            const list = document.createElement("div");
            list.className = "column";
            list.innerHTML = `<h2>frame ${col + 1}</h2>`;
            for (const shape of catalog.shapes) {
                const btn = document.createElement("button");
                btn.className = "shape-pick";
                btn.dataset.col = String(col);
                btn.dataset.shape = shape.id;
                btn.innerHTML =
                    `<span class="swatch" style="background:${shape.color}"></span>` +
                    `${shape.id} · ${shape.name}`;
                btn.addEventListener("click", () => {
                    this.picks[col] = shape.id;
                    list.querySelectorAll(".shape-pick").forEach((b) =>
                        b.classList.remove("chosen"));
                    btn.classList.add("chosen");
                    this.refreshActions(panel);
                });
                list.appendChild(btn);
            }
            columns.appendChild(list);
        }

        const userInput = panel.querySelector<HTMLInputElement>("#user")!;
        userInput.value = this.user;
        userInput.addEventListener("input", () => {
            this.user = userInput.value.trim();
            this.refreshActions(panel);
        });
        panel.querySelector("#enroll")!.addEventListener("click", () => {
            this.client.enroll(this.user, this.picks as Triple);
            this.setStatus("enrolling…");
        });
        panel.querySelector("#authenticate")!.addEventListener("click", () => {
            this.client.startSession(this.user);
        });
        this.refreshActions(panel);
    }

    private refreshActions(panel: Element): void {
        // a full triple gates both actions; authenticate sends none of it
        const complete = this.user.length > 0 &&
            this.picks.every((p) => p !== null);
        panel.querySelector<HTMLButtonElement>("#enroll")!.disabled = !complete;
        panel.querySelector<HTMLButtonElement>("#authenticate")!.disabled = !complete;
    }

    setStatus(text: string): void {
        const el = this.root.querySelector("#status");
        if (el) el.textContent = text;
    }

    private renderAuthCanvas(frameIndex: number, frameDurationMs: number): void {
        const catalog = this.catalog;
        if (!catalog) return;
        if (!this.canvas || !this.root.contains(this.canvas)) {
            this.root.innerHTML = "";
            this.canvas = document.createElement("canvas");
            this.canvas.width = catalog.canvasW;
            this.canvas.height = catalog.canvasH;
            this.root.appendChild(this.canvas);
            this.canvas.addEventListener("pointermove", (ev) => {
                const rect = this.canvas!.getBoundingClientRect();
                const x = (ev.clientX - rect.left) * (catalog.canvasW / rect.width);
                const y = (ev.clientY - rect.top) * (catalog.canvasH / rect.height);
                this.sampler?.update(x, y);
            });
        }
        const ctx = this.canvas.getContext("2d")!;
        this.stopFrame();
        this.sampler = new PointerSampler(this.scheduler, (t, x, y) => {
            this.client.pushPointer(t, x, y);
        });
        this.sampler.start();
        const token = ++this.frameToken;
        runFrame(
            this.scheduler,
            frameDurationMs,
            (elapsed) => {
                if (token === this.frameToken) {
                    renderFrame(ctx, catalog, frameIndex, elapsed);
                }
            },
            () => {
                if (token === this.frameToken) {
                    this.sampler?.stop();
                    this.client.endFrame();
                }
            },
        );
    }

    private stopFrame(): void {
        this.frameToken++;
        this.sampler?.stop();
        this.sampler = null;
    }

    private renderResult(granted: boolean): void {
        this.stopFrame();
        this.canvas = null;
        this.root.innerHTML = `
            <div class="panel result ${granted ? "granted" : "denied"}">
                <h1>${granted ? "granted" : "denied"}</h1>
                <button id="again">back</button>
            </div>`;
        this.root.querySelector("#again")!.addEventListener("click", () => {
            this.show({ kind: "password-selection" });
        });
    }

    private renderFailure(detail: string): void {
        this.stopFrame();
        this.canvas = null;
        this.root.innerHTML = `
            <div class="panel result denied">
                <h1>denied</h1>
                <p class="status">${detail}</p>
                <button id="again">back</button>
            </div>`;
        this.root.querySelector("#again")!.addEventListener("click", () => {
            this.show({ kind: "password-selection" });
        });
    }
}
