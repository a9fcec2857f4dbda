/**
 * Application bootstrap: wires the map viewport, annotation session, chip
 * area, and search panel against one API endpoint base.
 */

import { ApiClient, Condition, endpointBase, MapView as MapRecord } from "./api.js";
import { AnnotationSession } from "./annotator.js";
import { ChipArea } from "./chips.js";
import { MapView } from "./mapview.js";
import { SearchPanel } from "./search.js";

const CONDITIONS: Condition[] = ["LT", "ST", "SMT", "SMT_CTX"];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

export async function bootstrap(doc: Document, loc: Location): Promise<void> {
  const api = new ApiClient(endpointBase(loc));
  const root = doc.getElementById("app") ?? doc.body;

  const status = el(doc, "div", "status-toast");
  status.hidden = true;
  let statusTimer: ReturnType<typeof setTimeout> | null = null;
  const toast = (message: string) => {
    status.textContent = message;
    status.hidden = false;
    if (statusTimer) {
      clearTimeout(statusTimer);
    }
    statusTimer = setTimeout(() => (status.hidden = true), 4000);
  };

  const session = new AnnotationSession(api, {
    creatorId: "web-user",
    creatorName: "Web user",
    onChipsChanged: () => chipArea.render(),
    onError: toast,
  });

  const chipArea = new ChipArea(session.panel, api, {
    showAbstracts: () => session.condition === "SMT_CTX",
    annotationId: () => session.annotationId,
    onError: toast,
  }, doc);

  const mapView = new MapView(
    {
      onShapeDrawn: (shape) => {
        void session
          .begin(mapSelect.value, shape)
          .then(() => {
            commentBox.value = "";
            commentBox.disabled = false;
            saveButton.disabled = false;
            toast("Region marked; add your comment");
          })
          .catch(() => toast("Could not create the annotation"));
      },
      onControlPointPicked: (p) => {
        const lon = parseFloat(lonInput.value);
        const lat = parseFloat(latInput.value);
        if (Number.isNaN(lon) || Number.isNaN(lat)) {
          toast("Enter the location's longitude and latitude first");
          return;
        }
        void api
          .postControlPoints(mapSelect.value, [{ px: p.x, py: p.y, lon, lat, label: cpLabel.value || null }])
          .then(() => {
            mapView.renderControlPointMarker(p);
            toast("Control point added");
          })
          .catch(() => toast("Could not add the control point"));
      },
      onMessage: toast,
    },
    doc,
  );

  // -- header controls -------------------------------------------------

  const header = el(doc, "header", "toolbar");
  const mapSelect = el(doc, "select", "map-select");
  const conditionSelect = el(doc, "select", "condition-select");
  for (const condition of CONDITIONS) {
    const option = el(doc, "option", undefined, condition);
    option.value = condition;
    conditionSelect.append(option);
  }
  conditionSelect.value = "SMT_CTX";
  conditionSelect.addEventListener("change", () => {
    session.setCondition(conditionSelect.value as Condition);
    labelEntry.hidden = conditionSelect.value !== "LT";
  });

  const modeButtons = el(doc, "div", "mode-buttons");
  for (const [mode, label] of [
    ["none", "Pan"],
    ["rectangle", "Rectangle"],
    ["polygon", "Polygon"],
    ["controlpoint", "Control point"],
  ] as const) {
    const button = el(doc, "button", "mode-button", label);
    button.type = "button";
    button.addEventListener("click", () => {
      mapView.mode = mode;
      toast(`${label} mode`);
    });
    modeButtons.append(button);
  }
  const finishPolygon = el(doc, "button", "mode-button", "Close polygon");
  finishPolygon.type = "button";
  finishPolygon.addEventListener("click", () => mapView.closePolygon());
  modeButtons.append(finishPolygon);

  const lonInput = el(doc, "input", "cp-lon");
  lonInput.placeholder = "lon";
  lonInput.size = 8;
  const latInput = el(doc, "input", "cp-lat");
  latInput.placeholder = "lat";
  latInput.size = 8;
  const cpLabel = el(doc, "input", "cp-label");
  cpLabel.placeholder = "place name";
  cpLabel.size = 12;
  header.append(mapSelect, conditionSelect, modeButtons, lonInput, latInput, cpLabel);

  // -- sidebar: comment, chips, save, search ------------------------------

  const sidebar = el(doc, "aside", "sidebar");
  const commentBox = el(doc, "textarea", "comment-box");
  commentBox.placeholder = "Tell the story of this region";
  commentBox.disabled = true;
  commentBox.addEventListener("input", () => session.onTextInput(commentBox.value));

  const labelEntry = el(doc, "div", "label-entry");
  labelEntry.hidden = true;
  const labelInput = el(doc, "input", "label-input");
  labelInput.placeholder = "comma-separated tags";
  const labelButton = el(doc, "button", undefined, "Add tags");
  labelButton.type = "button";
  labelButton.addEventListener("click", () => {
    void session
      .addLabels(labelInput.value)
      .then(() => (labelInput.value = ""))
      .catch(() => toast("Could not add tags"));
  });
  labelEntry.append(labelInput, labelButton);

  const saveButton = el(doc, "button", "save-button", "Save annotation");
  saveButton.type = "button";
  saveButton.disabled = true;
  saveButton.addEventListener("click", () => {
    void session
      .save()
      .then(() => toast("Annotation saved"))
      .catch(() => toast("Could not save the annotation"));
  });

  const search = new SearchPanel(
    api,
    (hit) => {
      if (hit.kind === "annotation") {
        void session.resume(hit.id).then(({ text }) => {
          commentBox.value = text;
          commentBox.disabled = false;
          saveButton.disabled = false;
          conditionSelect.value = session.condition;
          labelEntry.hidden = session.condition !== "LT";
        });
      } else {
        void openMap(hit.id);
      }
    },
    doc,
  );

  sidebar.append(commentBox, labelEntry, chipArea.element, saveButton, search.element, status);

  const layout = el(doc, "div", "layout");
  layout.append(mapView.element, sidebar);
  root.append(header, layout);

  // -- map loading ---------------------------------------------------------

  const openMap = async (id: string): Promise<void> => {
    const record: MapRecord = await api.getMap(id);
    mapSelect.value = id;
    mapView.showMap(record.image_uri, record.width, record.height);
    for (const cp of record.control_points) {
      mapView.renderControlPointMarker({ x: cp.px, y: cp.py });
    }
    session.reset();
    commentBox.value = "";
    commentBox.disabled = true;
    saveButton.disabled = true;
  };

  const { maps } = await api.listMaps();
  for (const record of maps) {
    const option = el(doc, "option", undefined, record.title || record.id);
    option.value = record.id;
    mapSelect.append(option);
  }
  mapSelect.addEventListener("change", () => void openMap(mapSelect.value));
  if (maps.length > 0 && maps[0]) {
    await openMap(maps[0].id);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrap(document, window.location);
}
