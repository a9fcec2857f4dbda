/**
 * Pan/zoom image viewport with shape drawing and control-point placement.
 *
 * The map image and an SVG overlay live inside one transformed element,
 * so drawn shapes stay glued to their pixels at any zoom level. All
 * geometry is kept in image pixel coordinates; `Viewport.toImage`
 * converts pointer positions.
 */

export type DrawMode = "rectangle" | "polygon" | "controlpoint" | "none";

export interface Point {
  x: number;
  y: number;
}

/** Pure pan/zoom arithmetic, separated from the DOM for testability. */
export class Viewport {
  scale = 1;
  panX = 0;
  panY = 0;

  /** Convert viewport-local coordinates to image pixels. */
  toImage(localX: number, localY: number): Point {
    return { x: (localX - this.panX) / this.scale, y: (localY - this.panY) / this.scale };
  }

  /** Convert image pixels to viewport-local coordinates. */
  toLocal(p: Point): Point {
    return { x: p.x * this.scale + this.panX, y: p.y * this.scale + this.panY };
  }

  zoomAt(localX: number, localY: number, factor: number): void {
    const anchor = this.toImage(localX, localY);
    this.scale = Math.min(16, Math.max(0.05, this.scale * factor));
    this.panX = localX - anchor.x * this.scale;
    this.panY = localY - anchor.y * this.scale;
  }

  cssTransform(): string {
    return `translate(${this.panX}px, ${this.panY}px) scale(${this.scale})`;
  }
}

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapViewOptions {
  onShapeDrawn: (shape: Array<[number, number]>) => void;
  onControlPointPicked?: (p: Point) => void;
  onMessage?: (text: string) => void;
}

export class MapView {
  readonly element: HTMLElement;
  readonly viewport = new Viewport();
  mode: DrawMode = "none";
  private readonly content: HTMLElement;
  private readonly image: HTMLImageElement;
  private readonly overlay: SVGSVGElement;
  private draftPolygon: Point[] = [];
  private dragStart: Point | null = null;
  private panning: { x: number; y: number } | null = null;

  constructor(private readonly options: MapViewOptions, doc: Document = document) {
    this.element = doc.createElement("div");
    this.element.className = "map-view";
    this.content = doc.createElement("div");
    this.content.className = "map-view__content";
    this.image = doc.createElement("img");
    this.image.alt = "map";
    this.image.draggable = false;
    this.overlay = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.overlay.classList.add("map-view__overlay");
    this.content.append(this.image, this.overlay);
    this.element.append(this.content);
    this.wireEvents();
  }

  showMap(imageUri: string, width: number, height: number): void {
    this.image.src = imageUri;
    this.image.width = width;
    this.image.height = height;
    this.overlay.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.overlay.setAttribute("width", String(width));
    this.overlay.setAttribute("height", String(height));
    this.viewport.scale = 1;
    this.viewport.panX = 0;
    this.viewport.panY = 0;
    this.applyTransform();
    this.clearShapes();
  }

  private applyTransform(): void {
    this.content.style.transform = this.viewport.cssTransform();
  }

  private localPoint(event: MouseEvent): Point {
    const rect = this.element.getBoundingClientRect();
    return { x: event.clientX - rect.left, y: event.clientY - rect.top };
  }

  private imagePoint(event: MouseEvent): Point {
    const local = this.localPoint(event);
    return this.viewport.toImage(local.x, local.y);
  }

  private wireEvents(): void {
    this.element.addEventListener("wheel", (event) => {
      event.preventDefault();
      const local = this.localPoint(event);
      this.viewport.zoomAt(local.x, local.y, event.deltaY < 0 ? 1.2 : 1 / 1.2);
      this.applyTransform();
    });
    this.element.addEventListener("mousedown", (event) => {
      if (this.mode === "rectangle") {
        this.dragStart = this.imagePoint(event);
      } else if (this.mode === "none") {
        this.panning = { x: event.clientX - this.viewport.panX, y: event.clientY - this.viewport.panY };
      }
    });
    this.element.addEventListener("mousemove", (event) => {
      if (this.panning) {
        this.viewport.panX = event.clientX - this.panning.x;
        this.viewport.panY = event.clientY - this.panning.y;
        this.applyTransform();
      } else if (this.mode === "rectangle" && this.dragStart) {
        this.renderDraft(this.rectangleFrom(this.dragStart, this.imagePoint(event)));
      }
    });
    this.element.addEventListener("mouseup", (event) => {
      if (this.panning) {
        this.panning = null;
        return;
      }
      if (this.mode === "rectangle" && this.dragStart) {
        const shape = this.rectangleFrom(this.dragStart, this.imagePoint(event));
        this.dragStart = null;
        this.finishShape(shape);
      }
    });
    this.element.addEventListener("click", (event) => {
      if (this.mode === "polygon") {
        this.draftPolygon.push(this.imagePoint(event));
        this.renderDraft(this.draftPolygon);
      } else if (this.mode === "controlpoint") {
        this.options.onControlPointPicked?.(this.imagePoint(event));
      }
    });
    this.element.addEventListener("dblclick", () => {
      if (this.mode === "polygon") {
        this.closePolygon();
      }
    });
  }

  /** Finish the in-progress polygon; fewer than 3 vertices is blocked. */
  closePolygon(): void {
    if (this.draftPolygon.length < 3) {
      this.options.onMessage?.("A polygon needs at least 3 points");
      return;
    }
    const shape = [...this.draftPolygon];
    this.draftPolygon = [];
    this.finishShape(shape);
  }

  private rectangleFrom(a: Point, b: Point): Point[] {
    return [
      { x: a.x, y: a.y },
      { x: b.x, y: a.y },
      { x: b.x, y: b.y },
      { x: a.x, y: b.y },
    ];
  }

  private finishShape(points: Point[]): void {
    this.renderShape(points, "map-shape--committed");
    this.options.onShapeDrawn(points.map((p) => [p.x, p.y]));
  }

  private renderDraft(points: Point[]): void {
    this.removeByClass("map-shape--draft");
    if (points.length >= 2) {
      this.appendPolygon(points, "map-shape--draft");
    }
  }

  renderShape(points: Point[], cssClass = "map-shape--committed"): void {
    this.removeByClass("map-shape--draft");
    this.appendPolygon(points, cssClass);
  }

  renderControlPointMarker(p: Point): void {
    const dot = this.overlay.ownerDocument.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(p.x));
    dot.setAttribute("cy", String(p.y));
    dot.setAttribute("r", "6");
    dot.classList.add("map-controlpoint");
    this.overlay.append(dot);
  }

  clearShapes(): void {
    while (this.overlay.firstChild) {
      this.overlay.firstChild.remove();
    }
  }

  private appendPolygon(points: Point[], cssClass: string): void {
    const polygon = this.overlay.ownerDocument.createElementNS(SVG_NS, "polygon");
    polygon.setAttribute("points", points.map((p) => `${p.x},${p.y}`).join(" "));
    polygon.classList.add("map-shape", cssClass);
    this.overlay.append(polygon);
  }

  private removeByClass(cssClass: string): void {
    for (const el of [...this.overlay.querySelectorAll(`.${cssClass}`)]) {
      el.remove();
    }
  }
}
