/** WebGL2 rendering: all neuron spheres in one instanced impostor draw
 * (screen-aligned quads shaded analytically as spheres) plus one indexed
 * draw for the connection tubes of a view.
 */

import {
  DISPLACEMENT_STEP,
  NEAR_CLIP_MAX,
  SPHERE_RADIUS_MAX,
  SPHERE_RADIUS_MIN,
  SPHERE_RADIUS_SLOPE,
  divergingColor,
  sequentialColor,
} from "../encodings.js";
import type { Camera } from "../model.js";
import type { Positions } from "../payload.js";
import { perspectiveMatrix, viewMatrix, type Vec3 } from "./gfx.js";
import type { ViewDrawPlan } from "./plan.js";
import { buildTubeMesh } from "./tubes.js";

const SPHERE_VS = `#version 300 es
precision highp float;
layout(location = 0) in vec2 aCorner;
layout(location = 1) in vec3 aCenter;
layout(location = 2) in float aColorT;
uniform mat4 uView;
uniform mat4 uProj;
uniform vec3 uCameraPos;
uniform vec3 uCentroid;
uniform int uDisplayMode; // 0 dynamic radius, 1 displaced toward centroid
uniform float uRadiusSlope;
uniform float uRadiusMin;
uniform float uRadiusMax;
uniform float uDisplaceStep;
uniform int uSelectedCluster;
out vec2 vCorner;
out float vColorT;
out float vRadius;
out vec3 vCenterView;
flat out int vHighlight;
void main() {
  vec3 center = aCenter;
  int cluster = gl_InstanceID / 10;
  int slot = gl_InstanceID - cluster * 10;
  float radius;
  if (uDisplayMode == 1) {
    vec3 toCentroid = uCentroid - center;
    float len = length(toCentroid);
    if (len > 0.0) center += toCentroid * (float(slot) * uDisplaceStep / len);
    radius = uRadiusMin;
  } else {
    radius = clamp(uRadiusSlope * distance(uCameraPos, center), uRadiusMin, uRadiusMax);
  }
  vec4 centerView = uView * vec4(center, 1.0);
  vCenterView = centerView.xyz;
  centerView.xy += aCorner * radius;
  vCorner = aCorner;
  vColorT = aColorT;
  vRadius = radius;
  vHighlight = (cluster == uSelectedCluster) ? 1 : 0;
  gl_Position = uProj * centerView;
}`;

const SPHERE_FS = `#version 300 es
precision highp float;
in vec2 vCorner;
in float vColorT;
in float vRadius;
in vec3 vCenterView;
flat in int vHighlight;
uniform sampler2D uColormap;
uniform mat4 uProj;
out vec4 fragColor;
void main() {
  float r2 = dot(vCorner, vCorner);
  if (r2 > 1.0) discard;
  float nz = sqrt(1.0 - r2);
  vec3 normal = vec3(vCorner, nz);
  vec3 posView = vCenterView + vec3(vCorner * vRadius, nz * vRadius);
  vec4 clip = uProj * vec4(posView, 1.0);
  gl_FragDepth = clamp((clip.z / clip.w + 1.0) * 0.5, 0.0, 1.0);
  float light = 0.3 + 0.7 * max(dot(normal, normalize(vec3(0.25, 0.45, 0.85))), 0.0);
  vec3 color = texture(uColormap, vec2(vColorT, 0.5)).rgb;
  if (vHighlight == 1) color = mix(color, vec3(1.0, 0.95, 0.3), 0.55);
  fragColor = vec4(color * light, 1.0);
}`;

const TUBE_VS = `#version 300 es
precision highp float;
layout(location = 0) in vec3 aPosition;
layout(location = 1) in vec3 aNormal;
layout(location = 2) in vec3 aColor;
uniform mat4 uView;
uniform mat4 uProj;
out vec3 vNormal;
out vec3 vColor;
void main() {
  vNormal = aNormal;
  vColor = aColor;
  gl_Position = uProj * uView * vec4(aPosition, 1.0);
}`;

const TUBE_FS = `#version 300 es
precision highp float;
in vec3 vNormal;
in vec3 vColor;
out vec4 fragColor;
void main() {
  float light = 0.4 + 0.6 * abs(dot(normalize(vNormal), normalize(vec3(0.25, 0.45, 0.85))));
  fragColor = vec4(vColor * light, 1.0);
}`;

export interface ViewportRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface ViewRenderInput {
  rect: ViewportRect;
  camera: Camera;
  nearClip: number;
  displayMode: "dynamic_radius" | "displaced";
  plan: ViewDrawPlan;
  selectedCluster: number | null;
}

function compile(gl: WebGL2RenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const program = gl.createProgram()!;
  gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
  }
  return program;
}

function colormapTexture(gl: WebGL2RenderingContext, map: (t: number) => Vec3): WebGLTexture {
  const width = 256;
  const pixels = new Uint8Array(width * 4);
  for (let i = 0; i < width; i++) {
    const [r, g, b] = map(i / (width - 1));
    pixels[i * 4] = Math.round(r * 255);
    pixels[i * 4 + 1] = Math.round(g * 255);
    pixels[i * 4 + 2] = Math.round(b * 255);
    pixels[i * 4 + 3] = 255;
  }
  const texture = gl.createTexture()!;
  gl.bindTexture(gl.TEXTURE_2D, texture);
  gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, width, 1, 0, gl.RGBA, gl.UNSIGNED_BYTE, pixels);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
  return texture;
}

export class Renderer {
  private gl: WebGL2RenderingContext;
  private sphereProgram: WebGLProgram;
  private tubeProgram: WebGLProgram;
  private quadBuffer: WebGLBuffer;
  private centerBuffer: WebGLBuffer;
  private colorTBuffers = new Map<number, WebGLBuffer>();
  private sequentialMap: WebGLTexture;
  private divergingMap: WebGLTexture;
  private centroid: Vec3 = [0, 0, 0];
  private tubeBuffers = new Map<
    number,
    { vbo: WebGLBuffer; nbo: WebGLBuffer; cbo: WebGLBuffer; ibo: WebGLBuffer; count: number; key: object | null }
  >();

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2", { antialias: true });
    if (!gl) throw new Error("WebGL2 is required");
    this.gl = gl;
    this.sphereProgram = link(gl, SPHERE_VS, SPHERE_FS);
    this.tubeProgram = link(gl, TUBE_VS, TUBE_FS);
    this.quadBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, new Float32Array([-1, -1, 1, -1, -1, 1, 1, 1]), gl.STATIC_DRAW);
    this.centerBuffer = gl.createBuffer()!;
    this.sequentialMap = colormapTexture(gl, sequentialColor);
    this.divergingMap = colormapTexture(gl, divergingColor);
    gl.enable(gl.DEPTH_TEST);
    gl.enable(gl.SCISSOR_TEST);
  }

  setStatics(positions: Positions, centroid: Vec3): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.centerBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, positions.positions, gl.STATIC_DRAW);
    this.centroid = centroid;
  }

  beginFrame(): void {
    const gl = this.gl;
    gl.viewport(0, 0, this.canvas.width, this.canvas.height);
    gl.scissor(0, 0, this.canvas.width, this.canvas.height);
    gl.clearColor(0.07, 0.08, 0.1, 1);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
  }

  drawView(index: number, input: ViewRenderInput): void {
    const gl = this.gl;
    const { rect, plan } = input;
    if (rect.width <= 0 || rect.height <= 0) return;
    gl.viewport(rect.x, rect.y, rect.width, rect.height);
    gl.scissor(rect.x, rect.y, rect.width, rect.height);
    gl.clearColor(0.1, 0.11, 0.14, 1);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);

    const aspect = rect.width / rect.height;
    const near = Math.min(Math.max(input.nearClip, 0.1), NEAR_CLIP_MAX);
    const proj = perspectiveMatrix(Math.PI / 4, aspect, near, 5000);
    const view = viewMatrix(input.camera.position, input.camera.orientation);

    if (plan.tubes.length > 0) this.drawTubes(index, input, view, proj);
    if (plan.sphereInstanceCount > 0) this.drawSpheres(index, input, view, proj);
  }

  private drawSpheres(index: number, input: ViewRenderInput, view: Float32Array, proj: Float32Array): void {
    const gl = this.gl;
    const program = this.sphereProgram;
    gl.useProgram(program);

    let colorBuffer = this.colorTBuffers.get(index);
    if (!colorBuffer) {
      colorBuffer = gl.createBuffer()!;
      this.colorTBuffers.set(index, colorBuffer);
    }
    gl.bindBuffer(gl.ARRAY_BUFFER, colorBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, input.plan.colorT, gl.DYNAMIC_DRAW);

    gl.bindBuffer(gl.ARRAY_BUFFER, this.quadBuffer);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 2, gl.FLOAT, false, 0, 0);
    gl.vertexAttribDivisor(0, 0);

    gl.bindBuffer(gl.ARRAY_BUFFER, this.centerBuffer);
    gl.enableVertexAttribArray(1);
    gl.vertexAttribPointer(1, 3, gl.FLOAT, false, 0, 0);
    gl.vertexAttribDivisor(1, 1);

    gl.bindBuffer(gl.ARRAY_BUFFER, colorBuffer);
    gl.enableVertexAttribArray(2);
    gl.vertexAttribPointer(2, 1, gl.FLOAT, false, 0, 0);
    gl.vertexAttribDivisor(2, 1);

    const u = (name: string) => gl.getUniformLocation(program, name);
    gl.uniformMatrix4fv(u("uView"), false, view);
    gl.uniformMatrix4fv(u("uProj"), false, proj);
    gl.uniform3fv(u("uCameraPos"), input.camera.position);
    gl.uniform3fv(u("uCentroid"), this.centroid);
    gl.uniform1i(u("uDisplayMode"), input.displayMode === "displaced" ? 1 : 0);
    gl.uniform1f(u("uRadiusSlope"), SPHERE_RADIUS_SLOPE);
    gl.uniform1f(u("uRadiusMin"), SPHERE_RADIUS_MIN);
    gl.uniform1f(u("uRadiusMax"), SPHERE_RADIUS_MAX);
    gl.uniform1f(u("uDisplaceStep"), DISPLACEMENT_STEP);
    gl.uniform1i(u("uSelectedCluster"), input.selectedCluster ?? -1);

    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D, input.plan.colorScale.diverging ? this.divergingMap : this.sequentialMap);
    gl.uniform1i(u("uColormap"), 0);

    gl.drawArraysInstanced(gl.TRIANGLE_STRIP, 0, 4, input.plan.sphereInstanceCount);
    gl.vertexAttribDivisor(1, 0);
    gl.vertexAttribDivisor(2, 0);
  }

  private drawTubes(index: number, input: ViewRenderInput, view: Float32Array, proj: Float32Array): void {
    const gl = this.gl;
    let entry = this.tubeBuffers.get(index);
    if (!entry) {
      entry = {
        vbo: gl.createBuffer()!,
        nbo: gl.createBuffer()!,
        cbo: gl.createBuffer()!,
        ibo: gl.createBuffer()!,
        count: 0,
        key: null,
      };
      this.tubeBuffers.set(index, entry);
    }
    if (entry.key !== input.plan.tubes) {
      const mesh = buildTubeMesh(input.plan.tubes);
      gl.bindBuffer(gl.ARRAY_BUFFER, entry.vbo);
      gl.bufferData(gl.ARRAY_BUFFER, mesh.positions, gl.DYNAMIC_DRAW);
      gl.bindBuffer(gl.ARRAY_BUFFER, entry.nbo);
      gl.bufferData(gl.ARRAY_BUFFER, mesh.normals, gl.DYNAMIC_DRAW);
      gl.bindBuffer(gl.ARRAY_BUFFER, entry.cbo);
      gl.bufferData(gl.ARRAY_BUFFER, mesh.colors, gl.DYNAMIC_DRAW);
      gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, entry.ibo);
      gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, mesh.indices, gl.DYNAMIC_DRAW);
      entry.count = mesh.indices.length;
      entry.key = input.plan.tubes;
    }

    const program = this.tubeProgram;
    gl.useProgram(program);
    gl.bindBuffer(gl.ARRAY_BUFFER, entry.vbo);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, entry.nbo);
    gl.enableVertexAttribArray(1);
    gl.vertexAttribPointer(1, 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, entry.cbo);
    gl.enableVertexAttribArray(2);
    gl.vertexAttribPointer(2, 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, entry.ibo);
    const u = (name: string) => gl.getUniformLocation(program, name);
    gl.uniformMatrix4fv(u("uView"), false, view);
    gl.uniformMatrix4fv(u("uProj"), false, proj);
    gl.drawElements(gl.TRIANGLES, entry.count, gl.UNSIGNED_INT, 0);
  }
}
