// Frame timing and pointer sampling, parameterized over the clock so tests
// can drive them deterministically.

export interface Scheduler {
    now(): number;
    requestFrame(cb: (timeMs: number) => void): void;
    setInterval(cb: () => void, ms: number): number;
    clearInterval(id: number): void;
}

export function browserScheduler(): Scheduler {
    return {
        now: () => performance.now(),
        requestFrame: (cb) => void requestAnimationFrame(cb),
        setInterval: (cb, ms) => window.setInterval(cb, ms),
        clearInterval: (id) => window.clearInterval(id),
    };
}

/**
 * Drive one frame: onTick(elapsedMs) per animation tick until the duration
 * has elapsed, then onDone(finalElapsedMs) exactly once.
 */
export function runFrame(scheduler: Scheduler, durationMs: number,
                         onTick: (elapsedMs: number) => void,
                         onDone: (elapsedMs: number) => void): void {
    const start = scheduler.now();
    const step = (timeMs: number) => {
        const elapsed = timeMs - start;
        if (elapsed >= durationMs) {
            onTick(durationMs);
            onDone(elapsed);
            return;
        }
        onTick(elapsed);
        scheduler.requestFrame(step);
    };
    scheduler.requestFrame(step);
}

export const SAMPLE_RATE_HZ = 30;

/** Sample the latest pointer position on a fixed cadence during a frame. */
export class PointerSampler {
    private id: number | null = null;
    private startMs = 0;
    x = 0;
    y = 0;

    constructor(private scheduler: Scheduler,
                private onSample: (t: number, x: number, y: number) => void) {}

    update(x: number, y: number): void {
        this.x = x;
        this.y = y;
    }

    start(): void {
        this.stop();
        this.startMs = this.scheduler.now();
        this.id = this.scheduler.setInterval(() => {
            this.onSample(this.scheduler.now() - this.startMs, this.x, this.y);
        }, 1000 / SAMPLE_RATE_HZ);
    }

    stop(): void {
        if (this.id !== null) {
            this.scheduler.clearInterval(this.id);
            this.id = null;
        }
    }
}
