import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, readdirSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import {
    ArrayImage,
    TangentImageError,
    fromTangent,
    makePlaneSpecs,
    normalizeCamera,
    toTangent,
} from "../src/index.js";
import { decodePng } from "../src/png.js";
import { decodeSamples } from "../src/semantics.js";

const here = dirname(fileURLToPath(import.meta.url));
const sharedDir = join(here, "..", "..", "tests", "data", "shared");
const sharedImages = ["gradient.png", "checker.png", "noise.png"].map((n) =>
    join(sharedDir, n),
);
const cli = process.env.TANGENT_IMAGES_CLI ?? "tangent-images";

const scratchDirs: string[] = [];
function scratch(): string {
    const d = mkdtempSync(join(tmpdir(), "parity-"));
    scratchDirs.push(d);
    return d;
}
afterAll(() => {
    for (const d of scratchDirs) rmSync(d, { recursive: true, force: true });
});

function loadImage(path: string): ArrayImage {
    const raw = decodePng(readFileSync(path));
    return {
        data: decodeSamples(raw.data, { kind: "color8" }),
        height: raw.height,
        width: raw.width,
        channels: raw.channels,
    };
}

/** Golden fixtures straight from the CLI, the reference the bindings must
 * reproduce bit for bit. */
function cliGoldenTangent(imagePath: string, baseLevel: number): string {
    const outDir = join(scratch(), "golden");
    execFileSync(cli, [
        "to-tangent",
        "--input", imagePath,
        "--base-level", String(baseLevel),
        "--out", outDir,
    ]);
    return outDir;
}

function cliGoldenBack(tangentDir: string, height: number): string {
    const out = join(scratch(), "golden-back.png");
    execFileSync(cli, [
        "from-tangent",
        "--in", tangentDir,
        "--height", String(height),
        "--out", out,
    ]);
    return out;
}

describe("toTangent parity with CLI goldens", () => {
    for (const imagePath of sharedImages) {
        it(`matches golden faces for ${imagePath.split("/").pop()}`, () => {
            const golden = cliGoldenTangent(imagePath, 0);
            const set = toTangent(loadImage(imagePath), 0);
            expect(set.count).toBe(20);
            expect(set.dim).toBe(32);

            const faces = readdirSync(golden)
                .filter((n) => n.startsWith("face_"))
                .sort();
            expect(faces).toHaveLength(20);
            for (let k = 0; k < faces.length; k++) {
                const raw = decodePng(readFileSync(join(golden, faces[k])));
                const want = decodeSamples(raw.data, { kind: "color8" });
                const got = set.images.subarray(
                    k * set.dim * set.dim * set.channels,
                    (k + 1) * set.dim * set.dim * set.channels,
                );
                expect(Buffer.compare(
                    Buffer.from(new Float32Array(got).buffer),
                    Buffer.from(want.buffer),
                )).toBe(0);
            }
        });
    }
});

describe("fromTangent parity with CLI goldens", () => {
    for (const imagePath of sharedImages) {
        it(`matches golden panorama for ${imagePath.split("/").pop()}`, () => {
            const golden = cliGoldenTangent(imagePath, 0);
            const backGolden = loadImage(cliGoldenBack(golden, 64));
            const set = toTangent(loadImage(imagePath), 0);
            const back = fromTangent(set, 64);
            expect(back.height).toBe(64);
            expect(back.width).toBe(128);
            expect(Buffer.compare(
                Buffer.from(back.data.buffer),
                Buffer.from(backGolden.data.buffer),
            )).toBe(0);
        });
    }
});

describe("shape and error contracts", () => {
    it("renders a constant panorama to constant tangent images", () => {
        const height = 16;
        const img: ArrayImage = {
            data: new Float32Array(height * 2 * height).fill(100 / 255),
            height,
            width: 2 * height,
            channels: 1,
        };
        const set = toTangent(img, 0);
        const expected = Math.fround(100 / 255);
        for (const v of set.images) expect(v).toBe(expected);
    });

    it("rejects non-2:1 input with code format.aspect", () => {
        const img: ArrayImage = {
            data: new Float32Array(16 * 16),
            height: 16,
            width: 16,
            channels: 1,
        };
        let code = "";
        try {
            toTangent(img, 0);
        } catch (err) {
            code = (err as TangentImageError).code;
        }
        expect(code).toBe("format.aspect");
    });

    it("surfaces CLI error codes unchanged", () => {
        const img = loadImage(sharedImages[0]);
        let code = "";
        try {
            toTangent(img, 9); // base level above the input's level 5
        } catch (err) {
            code = (err as TangentImageError).code;
        }
        expect(code).toBe("invalid-argument");
    });
});

describe("plane specs and camera normalization", () => {
    it("exposes the tangent-plane geometry", () => {
        const specs = makePlaneSpecs(0, 10);
        expect(specs.dim).toBe(1024);
        expect(specs.faces).toHaveLength(20);
        expect(specs.faces[0].halfExtent).toBeCloseTo(1.10607, 4);
    });

    it("normalizes a perspective image to the target resolution", () => {
        const height = 800;
        const width = 1100;
        const data = new Float32Array(height * width);
        for (let i = 0; i < height; i++) {
            for (let j = 0; j < width; j++) {
                data[i * width + j] = ((i + j) % 256) / 255;
            }
        }
        const out = normalizeCamera(
            { data, height, width, channels: 1 },
            { fx: 700, fy: 650, cx: 500, cy: 390, width, height },
            { level: 8, fovDeg: 45, seed: 3 },
        );
        expect(out.image.height).toBe(128);
        expect(out.image.width).toBe(128);
        expect(out.intrinsics.fx).toBeCloseTo(154.5097, 3);
        expect(out.alpha).toBeCloseTo((2 * Math.PI) / 1024, 12);
    });
});
