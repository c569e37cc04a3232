/** Typed-array bindings over the camprior CLI.
 *
 * Every function shells out to the CLI and parses its documented file
 * formats, so results are byte-identical to what the CLI writes; no
 * numerical logic is duplicated here. Errors from the CLI surface as
 * exceptions carrying the primary error name (e.g. "UnknownCamera").
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { runCli, withTempDir } from "./cli.js";
import { readPfm, readPgmMask } from "./pfm.js";
import { readPng } from "./png.js";

export { readPfm, readPgmMask } from "./pfm.js";
export { readPng } from "./png.js";

export interface PriorSet {
  width: number;
  height: number;
  /** Channel names in stack order (9 channels). */
  channels: string[];
  /** (9, H, W) row-major float32 stack. */
  data: Float32Array;
  /** (H, W) validity mask, 1 where ground priors are meaningful. */
  valid: Uint8Array;
  manifest: Record<string, unknown>;
}

export interface RenderResult {
  width: number;
  height: number;
  /** (H, W, 3) uint8 RGB as written to the CLI's PNG. */
  rgb: Uint8Array;
  /** (H, W) float32 camera-frame depth, 0 where no splat was hit. */
  depth: Float32Array;
}

export interface SampledCamera {
  name: string;
  width: number;
  height: number;
  fu: number;
  fv: number;
  cu: number;
  cv: number;
  /** Row-major 3x3 camera-to-ego rotation. */
  R: number[];
  /** Camera origin in the ego frame, meters. */
  t: number[];
}

const PRESETS = new Set(["nuscenes", "lyft_fleet1", "lyft_fleet2", "waymo"]);

/** Accepts a preset name, a rig JSON file path, or rig JSON text. */
function materializeRig(rigJson: string, dir: string): string {
  if (PRESETS.has(rigJson) || existsSync(rigJson)) return rigJson;
  const trimmed = rigJson.trim();
  if (!trimmed.startsWith("{")) {
    throw new Error(`rig argument is neither a preset, an existing file, nor JSON: ${rigJson}`);
  }
  const path = join(dir, "rig.json");
  writeFileSync(path, trimmed);
  return path;
}

export interface BuildPriorSetOptions {
  maxDepth?: number;
  focalChannelMode?: "eq2" | "normalized500";
  /** Keep CLI artifacts in this directory instead of a temp dir. */
  outDir?: string;
}

export function build_prior_set(
  rigJson: string,
  camera: string,
  outW: number,
  outH: number,
  options: BuildPriorSetOptions = {},
): PriorSet {
  return withTempDir((dir) => {
    const rig = materializeRig(rigJson, dir);
    const out = join(dir, "priors");
    const args = [
      "priors", "build", "--rig", rig, "--camera", camera,
      "--out-w", String(outW), "--out-h", String(outH), "-o", out,
    ];
    if (options.maxDepth !== undefined) args.push("--max-depth", String(options.maxDepth));
    if (options.focalChannelMode !== undefined) {
      args.push("--focal-channel-mode", options.focalChannelMode);
    }
    runCli(args);
    const manifest = JSON.parse(readFileSync(join(out, "manifest.json"), "utf-8"));
    const channels: string[] = manifest.channels;
    const files: string[] = manifest.files;
    const planeLen = outW * outH;
    const data = new Float32Array(channels.length * planeLen);
    files.forEach((file, i) => {
      const plane = readPfm(join(out, file));
      if (plane.width !== outW || plane.height !== outH || plane.channels !== 1) {
        throw new Error(`${file}: unexpected shape ${plane.width}x${plane.height}`);
      }
      data.set(plane.data, i * planeLen);
    });
    const valid = readPgmMask(join(out, "valid.pgm"));
    return { width: outW, height: outH, channels, data, valid: valid.data, manifest };
  }, options.outDir);
}

export interface RenderOptions {
  /** Background RGB in [0, 1] (or [0, 255]); default black. */
  bg?: [number, number, number];
  threads?: number;
  outDir?: string;
}

export function render(
  scenePlyPath: string,
  rigJson: string,
  camera: string,
  options: RenderOptions = {},
): RenderResult {
  return withTempDir((dir) => {
    const rig = materializeRig(rigJson, dir);
    const out = join(dir, "render");
    const bg = options.bg ?? [0, 0, 0];
    const args = [
      "render", "--scene", scenePlyPath, "--rig", rig, "--camera", camera,
      "--bg", bg.join(","), "-o", out,
    ];
    if (options.threads !== undefined) args.push("--threads", String(options.threads));
    runCli(args);
    const image = readPng(join(out, `${camera}.png`));
    const depth = readPfm(join(out, `${camera}_depth.pfm`));
    if (depth.width !== image.width || depth.height !== image.height) {
      throw new Error("rgb/depth dimensions disagree");
    }
    return { width: image.width, height: image.height, rgb: image.data, depth: depth.data };
  }, options.outDir);
}

export interface SampleCameraOptions {
  /** AugmentSpec JSON object; default is the built-in policy. */
  spec?: Record<string, unknown>;
  outDir?: string;
}

export function sample_camera(
  rigJson: string,
  camera: string,
  seed: number,
  index: number,
  options: SampleCameraOptions = {},
): SampledCamera {
  return withTempDir((dir) => {
    const rigPath = materializeRig(rigJson, dir);
    // Sampling is keyed by (seed, index) per camera; a single-camera rig at
    // --start-index <index> reproduces exactly that draw.
    const full = PRESETS.has(rigPath)
      ? JSON.parse(runOrExport(rigPath, dir))
      : JSON.parse(readFileSync(rigPath, "utf-8"));
    const cam = full.cameras.find((c: SampledCamera) => c.name === camera);
    if (!cam) throw new Error(`UnknownCamera: no camera named ${camera} in rig`);
    const single = join(dir, "single.json");
    writeFileSync(single, JSON.stringify({ cameras: [cam] }));
    const args = [
      "augment", "sample", "--rig", single, "--seed", String(seed),
      "--count", "1", "--start-index", String(index), "-o", join(dir, "sampled"),
    ];
    if (options.spec) {
      const specPath = join(dir, "spec.json");
      writeFileSync(specPath, JSON.stringify(options.spec));
      args.push("--spec", specPath);
    }
    runCli(args);
    const name = `rig_${String(index).padStart(6, "0")}.json`;
    const sampled = JSON.parse(readFileSync(join(dir, "sampled", name), "utf-8"));
    return sampled.cameras[0] as SampledCamera;
  }, options.outDir);
}

function runOrExport(preset: string, dir: string): string {
  const path = join(dir, "exported.json");
  runCli(["rig", "export", preset, "-o", path]);
  return readFileSync(path, "utf-8");
}

export function nds_star(meanAp: number, mate: number, mase: number, maoe: number): number {
  const out = runCli([
    "metrics", "nds-star",
    "--map", String(meanAp), "--mate", String(mate),
    "--mase", String(mase), "--maoe", String(maoe),
  ]);
  const value = Number(out.trim());
  if (!Number.isFinite(value)) throw new Error(`unexpected CLI output: ${out}`);
  return value;
}
