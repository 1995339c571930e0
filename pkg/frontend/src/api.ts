// Typed client for the session API. All segmentation happens on the
// server; this module only moves bytes and JSON.

export interface EngineConfig {
    selectivity: number;
    threshold: number;
    radius: number;
    decay: number;
}

export interface SessionInfo {
    session_id: string;
    width: number;
    height: number;
    channels: number;
    config: EngineConfig;
}

export interface SessionState extends SessionInfo {
    prototypes: [number, number][];
    has_gold: boolean;
    ba: number | null;
}

export interface SegmentResult {
    mask_png: string;
    width: number;
    height: number;
    score_stats: { min: number; max: number; mean: number };
    object_pixels: number;
    ba: number | null;
    ba_note: string | null;
    config: EngineConfig;
    prototypes: [number, number][];
}

export class ApiError extends Error {
    constructor(readonly status: number, detail: string) {
        super(detail);
        this.name = "ApiError";
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(res: Response): Promise<string> {
    try {
        const body = await res.json();
        if (typeof body?.detail === "string") return body.detail;
        return JSON.stringify(body?.detail ?? body);
    } catch {
        return res.statusText || `http ${res.status}`;
    }
}

export class ApiClient {
    private inflight: AbortController | null = null;

    constructor(
        private base = "",
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request(path: string, init?: RequestInit): Promise<any> {
        const res = await this.fetchFn(this.base + path, init);
        if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
        return res.json();
    }

    createSession(image: BodyInit): Promise<SessionInfo> {
        return this.request("/sessions", { method: "POST", body: image });
    }

    getSession(sid: string): Promise<SessionState> {
        return this.request(`/sessions/${sid}`);
    }

    uploadGold(sid: string, mask: BodyInit): Promise<{ has_gold: boolean }> {
        return this.request(`/sessions/${sid}/gold`, { method: "POST", body: mask });
    }

    addPrototype(sid: string, row: number, col: number): Promise<{ prototypes: [number, number][] }> {
        return this.request(`/sessions/${sid}/prototypes`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ row, col }),
        });
    }

    deletePrototype(sid: string, index: number): Promise<{ prototypes: [number, number][] }> {
        return this.request(`/sessions/${sid}/prototypes/${index}`, { method: "DELETE" });
    }

    /** Run segmentation with config overrides. At most one request is in
     * flight; starting a new one aborts the old (latest wins). Returns
     * null when this call was superseded before it finished. */
    async segment(sid: string, overrides: Partial<EngineConfig>): Promise<SegmentResult | null> {
        this.inflight?.abort();
        const ctrl = new AbortController();
        this.inflight = ctrl;
        try {
            return await this.request(`/sessions/${sid}/segment`, {
                method: "POST",
                headers: { "content-type": "application/json" },
                body: JSON.stringify(overrides),
                signal: ctrl.signal,
            });
        } catch (err) {
            if (ctrl.signal.aborted) return null;
            throw err;
        } finally {
            if (this.inflight === ctrl) this.inflight = null;
        }
    }

    /** Export document as the exact bytes the service sent, so the
     * downloaded file is the server's JSON untouched. */
    async exportText(sid: string): Promise<string> {
        const res = await this.fetchFn(`${this.base}/sessions/${sid}/export`);
        if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
        return res.text();
    }
}
