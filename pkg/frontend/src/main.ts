import { ApiClient, ApiError, EngineConfig, SegmentResult } from "./api.js";
import {
    ViewTransform, canvasToPixel, pixelToCanvas, fitView, zoomAt, panBy,
    decayFromSlider, sliderFromDecay,
} from "./transforms.js";
import { decodeMaskPng, tintMask } from "./overlay.js";

const DEBOUNCE_MS = 150;
const MARKER_COLOR = "#2dd4bf";
const OVERLAY_RGB: [number, number, number] = [239, 68, 68];

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

class App {
    private api = new ApiClient();

    private canvas = el<HTMLCanvasElement>("canvas");
    private ctx = this.canvas.getContext("2d")!;

    private imageFile = el<HTMLInputElement>("image-file");
    private goldFile = el<HTMLInputElement>("gold-file");
    private selectivity = el<HTMLInputElement>("selectivity");
    private threshold = el<HTMLInputElement>("threshold");
    private radius = el<HTMLInputElement>("radius");
    private falloff = el<HTMLInputElement>("falloff");
    private opacity = el<HTMLInputElement>("opacity");
    private exportBtn = el<HTMLButtonElement>("export-btn");
    private protoList = el<HTMLUListElement>("proto-list");
    private baLabel = el<HTMLElement>("ba-label");
    private statsLabel = el<HTMLElement>("stats-label");
    private sessionLabel = el<HTMLElement>("session-label");
    private toastBox = el<HTMLElement>("toast");

    private sessionId: string | null = null;
    private imageBitmap: ImageBitmap | null = null;
    private imageWidth = 0;
    private imageHeight = 0;
    private prototypes: [number, number][] = [];
    private overlayCanvas: HTMLCanvasElement | null = null;
    private hasGold = false;

    private view: ViewTransform = { zoom: 1, panX: 0, panY: 0 };
    private debounceTimer: number | null = null;
    private toastTimer: number | null = null;

    // pointer drag state; a press that moves past the threshold pans
    // instead of placing a prototype
    private dragFrom: { x: number; y: number } | null = null;
    private dragging = false;

    constructor() {
        this.imageFile.addEventListener("change", () => this.loadImage());
        this.goldFile.addEventListener("change", () => this.loadGold());
        this.exportBtn.addEventListener("click", () => this.downloadExport());

        for (const slider of [this.selectivity, this.threshold, this.radius, this.falloff]) {
            slider.addEventListener("input", () => {
                this.updateSliderLabels();
                this.scheduleSegment();
            });
        }
        this.opacity.addEventListener("input", () => {
            this.updateSliderLabels();
            this.draw();
        });

        this.canvas.addEventListener("wheel", (ev) => {
            ev.preventDefault();
            if (!this.imageBitmap) return;
            const rect = this.canvas.getBoundingClientRect();
            const factor = ev.deltaY < 0 ? 1.25 : 0.8;
            this.view = zoomAt(this.view, factor, ev.clientX - rect.left, ev.clientY - rect.top);
            this.draw();
        });
        el<HTMLButtonElement>("zoom-in").addEventListener("click", () =>
            this.zoomCentered(1.25));
        el<HTMLButtonElement>("zoom-out").addEventListener("click", () =>
            this.zoomCentered(0.8));
        el<HTMLButtonElement>("zoom-fit").addEventListener("click", () => {
            if (!this.imageBitmap) return;
            this.view = fitView(this.imageWidth, this.imageHeight,
                                this.canvas.width, this.canvas.height);
            this.draw();
        });

        this.canvas.addEventListener("pointerdown", (ev) => {
            this.dragFrom = { x: ev.clientX, y: ev.clientY };
            this.dragging = false;
            this.canvas.setPointerCapture(ev.pointerId);
        });
        this.canvas.addEventListener("pointermove", (ev) => {
            if (!this.dragFrom) return;
            const dx = ev.clientX - this.dragFrom.x;
            const dy = ev.clientY - this.dragFrom.y;
            if (!this.dragging && Math.hypot(dx, dy) < 4) return;
            this.dragging = true;
            this.view = panBy(this.view, dx, dy);
            this.dragFrom = { x: ev.clientX, y: ev.clientY };
            this.draw();
        });
        this.canvas.addEventListener("pointerup", (ev) => {
            const wasClick = this.dragFrom && !this.dragging;
            this.dragFrom = null;
            if (wasClick) {
                const rect = this.canvas.getBoundingClientRect();
                this.clickAt(ev.clientX - rect.left, ev.clientY - rect.top);
            }
        });

        this.updateSliderLabels();
        this.setControlsEnabled();
    }

    private zoomCentered(factor: number) {
        if (!this.imageBitmap) return;
        this.view = zoomAt(this.view, factor, this.canvas.width / 2, this.canvas.height / 2);
        this.draw();
    }

    private currentConfig(): EngineConfig {
        return {
            selectivity: Number(this.selectivity.value),
            threshold: Number(this.threshold.value),
            radius: Number(this.radius.value),
            decay: decayFromSlider(Number(this.falloff.value)),
        };
    }

    private setConfigSliders(cfg: EngineConfig) {
        this.selectivity.value = String(cfg.selectivity);
        this.threshold.value = String(cfg.threshold);
        this.radius.value = String(cfg.radius);
        this.falloff.value = sliderFromDecay(cfg.decay).toFixed(2);
        this.updateSliderLabels();
    }

    private updateSliderLabels() {
        el("selectivity-val").textContent = this.selectivity.value;
        el("threshold-val").textContent = Number(this.threshold.value).toFixed(2);
        el("radius-val").textContent = this.radius.value;
        const inv = 1 / decayFromSlider(Number(this.falloff.value));
        el("falloff-val").textContent = `1/${Math.round(inv)}`;
        el("opacity-val").textContent = Number(this.opacity.value).toFixed(2);
    }

    private setControlsEnabled() {
        // tuning makes no sense before the first prototype
        const ready = this.sessionId !== null && this.prototypes.length > 0;
        for (const slider of [this.selectivity, this.threshold, this.radius, this.falloff]) {
            slider.disabled = !ready;
        }
        this.exportBtn.disabled = this.sessionId === null;
        this.goldFile.disabled = this.sessionId === null;
    }

    private toast(message: string) {
        this.toastBox.textContent = message;
        this.toastBox.classList.add("show");
        if (this.toastTimer !== null) clearTimeout(this.toastTimer);
        this.toastTimer = window.setTimeout(
            () => this.toastBox.classList.remove("show"), 4000);
    }

    private fail(err: unknown) {
        if (err instanceof ApiError) this.toast(`${err.status}: ${err.message}`);
        else this.toast(String(err));
    }

    private async loadImage() {
        const file = this.imageFile.files?.[0];
        if (!file) return;
        try {
            const info = await this.api.createSession(file);
            this.sessionId = info.session_id;
            this.imageWidth = info.width;
            this.imageHeight = info.height;
            this.imageBitmap = await createImageBitmap(file);
            this.prototypes = [];
            this.overlayCanvas = null;
            this.hasGold = false;
            this.setConfigSliders(info.config);
            this.view = fitView(info.width, info.height, this.canvas.width, this.canvas.height);
            this.sessionLabel.textContent =
                `session ${info.session_id}, ${info.width}x${info.height}, ` +
                `${info.channels === 3 ? "rgb" : "gray"}`;
            this.baLabel.textContent = "";
            this.statsLabel.textContent = "";
            this.renderProtoList();
            this.setControlsEnabled();
            this.draw();
        } catch (err) {
            this.fail(err);
        }
    }

    private async loadGold() {
        const file = this.goldFile.files?.[0];
        if (!file || !this.sessionId) return;
        try {
            await this.api.uploadGold(this.sessionId, file);
            this.hasGold = true;
            this.toast("gold mask loaded");
            this.scheduleSegment();
        } catch (err) {
            this.fail(err);
        }
    }

    private async clickAt(x: number, y: number) {
        if (!this.sessionId || !this.imageBitmap) return;
        const pixel = canvasToPixel(this.view, x, y, this.imageWidth, this.imageHeight);
        if (!pixel) return;   // outside the image, no request
        try {
            const res = await this.api.addPrototype(this.sessionId, pixel.row, pixel.col);
            // marker appears only once the service acknowledged it
            this.prototypes = res.prototypes;
            this.renderProtoList();
            this.setControlsEnabled();
            this.draw();
            this.scheduleSegment();
        } catch (err) {
            this.fail(err);
        }
    }

    private async removePrototype(index: number) {
        if (!this.sessionId) return;
        try {
            const res = await this.api.deletePrototype(this.sessionId, index);
            this.prototypes = res.prototypes;
            this.renderProtoList();
            this.setControlsEnabled();
            if (this.prototypes.length > 0) this.scheduleSegment();
            else {
                this.overlayCanvas = null;
                this.baLabel.textContent = "";
                this.statsLabel.textContent = "";
            }
            this.draw();
        } catch (err) {
            this.fail(err);
        }
    }

    private renderProtoList() {
        this.protoList.textContent = "";
        this.prototypes.forEach(([row, col], i) => {
            const item = document.createElement("li");
            const label = document.createElement("span");
            label.textContent = `(${row}, ${col})`;
            const remove = document.createElement("button");
            remove.textContent = "x";
            remove.title = "remove";
            remove.addEventListener("click", () => this.removePrototype(i));
            item.append(label, remove);
            this.protoList.append(item);
        });
    }

    private scheduleSegment() {
        if (!this.sessionId || this.prototypes.length === 0) return;
        if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
        this.debounceTimer = window.setTimeout(() => {
            this.debounceTimer = null;
            this.runSegment();
        }, DEBOUNCE_MS);
    }

    private async runSegment() {
        if (!this.sessionId) return;
        try {
            const res = await this.api.segment(this.sessionId, this.currentConfig());
            if (res === null) return;   // superseded by a newer request
            await this.applySegment(res);
        } catch (err) {
            this.fail(err);
        }
    }

    private async applySegment(res: SegmentResult) {
        const mask = await decodeMaskPng(res.mask_png);
        this.overlayCanvas = tintMask(mask, OVERLAY_RGB);
        this.prototypes = res.prototypes;
        this.setConfigSliders(res.config);
        if (res.ba !== null) {
            this.baLabel.textContent = `balanced accuracy ${res.ba.toFixed(4)}`;
        } else if (res.ba_note) {
            this.baLabel.textContent = `accuracy undefined: ${res.ba_note}`;
        } else if (!this.hasGold) {
            this.baLabel.textContent = "upload a gold mask to see accuracy";
        }
        const s = res.score_stats;
        this.statsLabel.textContent =
            `${res.object_pixels} object px, scores ` +
            `${s.min.toFixed(3)}..${s.max.toFixed(3)} mean ${s.mean.toFixed(3)}`;
        this.renderProtoList();
        this.draw();
    }

    private async downloadExport() {
        if (!this.sessionId) return;
        try {
            // the file is the service's export body, byte for byte
            const text = await this.api.exportText(this.sessionId);
            const url = URL.createObjectURL(new Blob([text], { type: "application/json" }));
            const a = document.createElement("a");
            a.href = url;
            a.download = `coinseg-${this.sessionId}.json`;
            a.click();
            URL.revokeObjectURL(url);
        } catch (err) {
            this.fail(err);
        }
    }

    private draw() {
        const { ctx, canvas } = this;
        ctx.fillStyle = "#111418";
        ctx.fillRect(0, 0, canvas.width, canvas.height);
        if (!this.imageBitmap) {
            ctx.fillStyle = "#8b949e";
            ctx.font = "14px sans-serif";
            ctx.fillText("load an image to start", 24, 32);
            return;
        }
        ctx.save();
        ctx.imageSmoothingEnabled = false;
        const w = this.imageWidth * this.view.zoom;
        const h = this.imageHeight * this.view.zoom;
        ctx.drawImage(this.imageBitmap, this.view.panX, this.view.panY, w, h);
        const alpha = Number(this.opacity.value);
        if (this.overlayCanvas && alpha > 0) {
            ctx.globalAlpha = alpha;
            ctx.drawImage(this.overlayCanvas, this.view.panX, this.view.panY, w, h);
            ctx.globalAlpha = 1;
        }
        ctx.restore();

        const r = Math.max(3, this.view.zoom * 0.3);
        ctx.strokeStyle = MARKER_COLOR;
        ctx.lineWidth = 2;
        for (const [row, col] of this.prototypes) {
            const { x, y } = pixelToCanvas(this.view, { row, col });
            ctx.beginPath();
            ctx.arc(x, y, r, 0, Math.PI * 2);
            ctx.stroke();
            ctx.beginPath();
            ctx.moveTo(x - r, y);
            ctx.lineTo(x + r, y);
            ctx.moveTo(x, y - r);
            ctx.lineTo(x, y + r);
            ctx.stroke();
        }
        el("zoom-label").textContent = `${this.view.zoom.toFixed(2)}x`;
    }
}

new App();
