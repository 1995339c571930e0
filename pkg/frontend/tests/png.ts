// Minimal decoder for the service's mask PNGs: 8-bit grayscale,
// non-interlaced. Test-only; the browser UI uses its native decoder.

import { inflateSync } from "node:zlib";

const SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

function paeth(a: number, b: number, c: number): number {
    const p = a + b - c;
    const pa = Math.abs(p - a);
    const pb = Math.abs(p - b);
    const pc = Math.abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    return pb <= pc ? b : c;
}

export function decodeGrayPng(buf: Uint8Array): {
    width: number;
    height: number;
    data: Uint8Array;
} {
    for (let i = 0; i < 8; i++) {
        if (buf[i] !== SIGNATURE[i]) throw new Error("not a png");
    }
    const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
    let pos = 8;
    let width = 0;
    let height = 0;
    const idat: Buffer[] = [];
    while (pos < buf.length) {
        const len = view.getUint32(pos);
        const type = String.fromCharCode(buf[pos + 4], buf[pos + 5], buf[pos + 6], buf[pos + 7]);
        if (type === "IHDR") {
            width = view.getUint32(pos + 8);
            height = view.getUint32(pos + 12);
            const bitDepth = buf[pos + 16];
            const colorType = buf[pos + 17];
            const interlace = buf[pos + 20];
            if (bitDepth !== 8 || colorType !== 0 || interlace !== 0) {
                throw new Error(
                    `unsupported png: depth ${bitDepth} color ${colorType} interlace ${interlace}`);
            }
        } else if (type === "IDAT") {
            idat.push(Buffer.from(buf.subarray(pos + 8, pos + 8 + len)));
        } else if (type === "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (!width || !height || idat.length === 0) throw new Error("truncated png");

    const raw = inflateSync(Buffer.concat(idat));
    const stride = width + 1;
    if (raw.length < stride * height) throw new Error("short pixel data");

    const out = new Uint8Array(width * height);
    let prev = new Uint8Array(width);
    for (let r = 0; r < height; r++) {
        const filter = raw[r * stride];
        const line = raw.subarray(r * stride + 1, (r + 1) * stride);
        const cur = new Uint8Array(width);
        for (let i = 0; i < width; i++) {
            const a = i > 0 ? cur[i - 1] : 0;
            const up = prev[i];
            const diag = i > 0 ? prev[i - 1] : 0;
            let v = line[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += up; break;
                case 3: v += (a + up) >> 1; break;
                case 4: v += paeth(a, up, diag); break;
                default: throw new Error(`bad filter byte ${filter}`);
            }
            cur[i] = v & 0xff;
        }
        out.set(cur, r * width);
        prev = cur;
    }
    return { width, height, data: out };
}
