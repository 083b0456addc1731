"""Scene graphs over detector, OCR, and face results for one captured frame.

Detected objects and faces form the parent layer; OCR texts attach as
children to every parent they overlap by at least 70% of their own area,
and each parent keeps its five largest children. Texts held by no parent
are orphans, so the graph never loses an annotation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import DegenerateBox, SchemaViolation

DEFAULT_OVERLAP_THRESHOLD = 0.70
DEFAULT_MAX_CHILDREN = 5
# Plural-region expansion: half the frame width and height.
PLURAL_REGION_FRACTION = (0.5, 0.5)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in frame pixels, origin at the top-left corner."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted box: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, point: tuple[float, float]) -> bool:
        u, v = point
        return self.x_min <= u <= self.x_max and self.y_min <= v <= self.y_max

    def intersection_area(self, other: "BBox") -> float:
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def overlap_ratio(child: BBox, parent: BBox, mode: str = "child") -> float:
    """Fraction of ``child`` covered by ``parent``.

    ``mode="child"`` divides the intersection by the child's own area, which
    is what attaches small text boxes to large parents; ``mode="iou"`` uses
    intersection-over-union instead.

    Raises:
        DegenerateBox: if the child box has zero area.
    """
    if child.area == 0:
        raise DegenerateBox(f"zero-area child box: {child}")
    inter = child.intersection_area(parent)
    if mode == "iou":
        union = child.area + parent.area - inter
        return inter / union if union > 0 else 0.0
    if mode != "child":
        raise ValueError(f"unknown overlap mode: {mode!r}")
    return inter / child.area


class EntityKind(Enum):
    OBJECT = "object"
    FACE = "face"


@dataclass(frozen=True)
class FrameMeta:
    """Dimensions and lifecycle of one captured frame.

    When ``ephemeral`` is set, any pixel payload attached to the frame is
    purged as soon as the query answer is produced.
    """

    width: int
    height: int
    captured_at: float = 0.0
    ephemeral: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"frame dimensions must be positive: {self.width}x{self.height}")

    def contains(self, box: BBox) -> bool:
        return 0 <= box.x_min and 0 <= box.y_min and box.x_max <= self.width and box.y_max <= self.height


@dataclass(frozen=True)
class DetectedEntity:
    """One parent-layer detection: an object class or a recognized face."""

    kind: EntityKind
    label: str
    confidence: float
    bbox: BBox

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


@dataclass(frozen=True)
class OcrText:
    """One child-layer OCR result."""

    text: str
    confidence: float
    bbox: BBox

    def __post_init__(self):
        if not self.text:
            raise ValueError("OCR text must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


@dataclass(frozen=True)
class SceneParent:
    """A parent entity with its retained children, largest area first."""

    entity: DetectedEntity
    children: tuple[OcrText, ...] = ()


@dataclass(frozen=True)
class SceneGraph:
    frame: FrameMeta
    parents: tuple[SceneParent, ...] = ()
    orphan_texts: tuple[OcrText, ...] = ()

    def all_texts(self) -> list[OcrText]:
        """Every distinct text in the graph (children and orphans)."""
        seen: list[OcrText] = []
        for parent in self.parents:
            for child in parent.children:
                if child not in seen:
                    seen.append(child)
        for orphan in self.orphan_texts:
            if orphan not in seen:
                seen.append(orphan)
        return seen

    def parents_at(
        self, point: tuple[float, float], kind: Optional[EntityKind] = None
    ) -> list[SceneParent]:
        """Parents whose bbox contains ``point``, smallest area first."""
        hits = [
            p
            for p in self.parents
            if p.entity.bbox.contains(point) and (kind is None or p.entity.kind is kind)
        ]
        hits.sort(key=lambda p: (p.entity.bbox.area, _entity_order_key(p.entity)))
        return hits


def _entity_order_key(entity: DetectedEntity):
    b = entity.bbox
    return (b.x_min, b.y_min, b.x_max, b.y_max, entity.kind.value, entity.label)


def _reading_order_key(text: OcrText):
    return (text.bbox.y_min, text.bbox.x_min, text.text)


def associate(
    entities: Sequence[DetectedEntity],
    texts: Sequence[OcrText],
    frame: FrameMeta,
    *,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    max_children: int = DEFAULT_MAX_CHILDREN,
    overlap_mode: str = "child",
    exclusive_children: bool = False,
    min_confidence: float = 0.0,
) -> SceneGraph:
    """Build the parent/child hierarchy for one frame.

    Every text attaches to each entity it overlaps by at least
    ``overlap_threshold`` of its own area (multi-assignment; set
    ``exclusive_children`` to keep only the best-overlap parent). Each parent
    then retains its ``max_children`` largest-area children, ties broken in
    reading order. Texts retained by no parent become orphans. The result is
    deterministic and invariant to input ordering.
    """
    kept_entities = sorted(
        (e for e in entities if e.confidence >= min_confidence),
        key=_entity_order_key,
    )
    kept_texts = sorted(
        (t for t in texts if t.confidence >= min_confidence),
        key=_reading_order_key,
    )

    assigned: dict[int, list[OcrText]] = {i: [] for i in range(len(kept_entities))}
    for text in kept_texts:
        ratios = [
            (i, overlap_ratio(text.bbox, entity.bbox, overlap_mode))
            for i, entity in enumerate(kept_entities)
        ]
        qualifying = [(i, r) for i, r in ratios if r >= overlap_threshold]
        if not qualifying:
            continue
        if exclusive_children:
            best = max(qualifying, key=lambda ir: (ir[1], -ir[0]))
            qualifying = [best]
        for i, _ in qualifying:
            assigned[i].append(text)

    parents: list[SceneParent] = []
    retained: set[int] = set()
    for i, entity in enumerate(kept_entities):
        children = sorted(assigned[i], key=lambda t: (-t.bbox.area, *_reading_order_key(t)))
        children = children[:max_children]
        retained.update(id(t) for t in children)
        parents.append(SceneParent(entity=entity, children=tuple(children)))

    orphans = tuple(t for t in kept_texts if id(t) not in retained)
    return SceneGraph(frame=frame, parents=tuple(parents), orphan_texts=orphans)


def nearest_texts(
    origin: tuple[float, float], texts: Sequence[OcrText], k: int
) -> list[OcrText]:
    """The ``k`` texts whose centers are nearest ``origin``, ascending.

    Ties break in reading order (smaller y_min, then x_min). Returns fewer
    than ``k`` when the scene is small.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def key(t: OcrText):
        cu, cv = t.bbox.center
        return (math.hypot(cu - origin[0], cv - origin[1]), *_reading_order_key(t))

    return sorted(texts, key=key)[:k]


def expand_plural_region(
    origin: tuple[float, float],
    frame: FrameMeta,
    *,
    fraction: tuple[float, float] = PLURAL_REGION_FRACTION,
) -> BBox:
    """Expand a point input into a region for plural-pronoun selection.

    The region is ``fraction`` of the frame size (default half width by half
    height) centered on ``origin``, clamped to the frame bounds; an origin
    outside the frame is clamped in first.
    """
    ox = min(max(origin[0], 0.0), float(frame.width))
    oy = min(max(origin[1], 0.0), float(frame.height))
    half_w = frame.width * fraction[0] / 2.0
    half_h = frame.height * fraction[1] / 2.0
    return BBox(
        max(0.0, ox - half_w),
        max(0.0, oy - half_h),
        min(float(frame.width), ox + half_w),
        min(float(frame.height), oy + half_h),
    )


# ---------------------------------------------------------------------------
# Scene fixture files
#
# JSON schema (the contract for mock backends, replay, and the playground):
# {
#   "frame": {"width": int, "height": int},
#   "objects": [{"label": str, "confidence": float, "bbox": [x0,y0,x1,y1]}],
#   "faces":   [{"name": str, "confidence": float, "bbox": [x0,y0,x1,y1]}],
#   "texts":   [{"text": str, "confidence": float, "bbox": [x0,y0,x1,y1]}]
# }
# All coordinates are integer pixels within the frame.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SceneFixture:
    """Raw annotations standing in for a live frame plus its ML results."""

    frame: FrameMeta
    entities: tuple[DetectedEntity, ...] = ()
    texts: tuple[OcrText, ...] = ()

    def objects(self) -> list[DetectedEntity]:
        return [e for e in self.entities if e.kind is EntityKind.OBJECT]

    def faces(self) -> list[DetectedEntity]:
        return [e for e in self.entities if e.kind is EntityKind.FACE]


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise SchemaViolation(f"{where}: missing key {key!r}")
    return data[key]


def _parse_bbox(raw, frame: Optional[FrameMeta], where: str) -> BBox:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise SchemaViolation(f"{where}: bbox must be [x_min, y_min, x_max, y_max]")
    try:
        box = BBox(*[float(v) for v in raw])
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(f"{where}: {exc}") from exc
    if box.area <= 0:
        raise SchemaViolation(f"{where}: bbox must have positive area")
    if frame is not None and not frame.contains(box):
        raise SchemaViolation(f"{where}: bbox {box.as_list()} outside frame")
    return box


def parse_scene_fixture(data: dict, *, captured_at: float = 0.0) -> SceneFixture:
    """Validate and parse a scene fixture dict into typed annotations."""
    if not isinstance(data, dict):
        raise SchemaViolation("fixture root must be an object")
    frame_raw = _require(data, "frame", "fixture")
    frame = FrameMeta(
        width=int(_require(frame_raw, "width", "frame")),
        height=int(_require(frame_raw, "height", "frame")),
        captured_at=captured_at,
    )
    entities: list[DetectedEntity] = []
    for i, obj in enumerate(data.get("objects", [])):
        where = f"objects[{i}]"
        entities.append(
            DetectedEntity(
                kind=EntityKind.OBJECT,
                label=str(_require(obj, "label", where)),
                confidence=float(obj.get("confidence", 1.0)),
                bbox=_parse_bbox(_require(obj, "bbox", where), frame, where),
            )
        )
    for i, face in enumerate(data.get("faces", [])):
        where = f"faces[{i}]"
        entities.append(
            DetectedEntity(
                kind=EntityKind.FACE,
                label=str(_require(face, "name", where)),
                confidence=float(face.get("confidence", 1.0)),
                bbox=_parse_bbox(_require(face, "bbox", where), frame, where),
            )
        )
    texts: list[OcrText] = []
    for i, txt in enumerate(data.get("texts", [])):
        where = f"texts[{i}]"
        texts.append(
            OcrText(
                text=str(_require(txt, "text", where)),
                confidence=float(txt.get("confidence", 1.0)),
                bbox=_parse_bbox(_require(txt, "bbox", where), frame, where),
            )
        )
    return SceneFixture(frame=frame, entities=tuple(entities), texts=tuple(texts))


def load_scene_fixture(path: Union[str, Path], *, captured_at: float = 0.0) -> SceneFixture:
    """Load and validate a scene fixture JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: invalid JSON ({exc})") from exc
    return parse_scene_fixture(data, captured_at=captured_at)


def bundled_fixture_path(name: str) -> Path:
    """Path to one of the bundled scene fixtures (mango, pocachip, ...)."""
    path = Path(__file__).parent / "data" / "fixtures" / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in path.parent.glob("*.json"))
        raise FileNotFoundError(f"no bundled fixture {name!r}; available: {available}")
    return path


def fixture_to_dict(fixture: SceneFixture) -> dict:
    """Serialize a fixture back to the documented JSON shape."""
    return {
        "frame": {"width": fixture.frame.width, "height": fixture.frame.height},
        "objects": [
            {"label": e.label, "confidence": e.confidence, "bbox": e.bbox.as_list()}
            for e in fixture.objects()
        ],
        "faces": [
            {"name": e.label, "confidence": e.confidence, "bbox": e.bbox.as_list()}
            for e in fixture.faces()
        ],
        "texts": [
            {"text": t.text, "confidence": t.confidence, "bbox": t.bbox.as_list()}
            for t in fixture.texts
        ],
    }
