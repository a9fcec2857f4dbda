"""One complete annotation session from shape to published document.

A user marks a region, writes a comment, receives suggestions, accepts
some and prunes others, and the result becomes a dereferenceable
annotation document plus qualified relationships in the tagging graph.
"""

import json

from maptag import AnnotationStore, UserRef, merge_suggestions, suggest_from_text
from maptag.providers import GIBRALTAR_SAMPLE_TEXT, load_knowledge_context

store = AnnotationStore(base_uri="http://maps.example")
context = load_knowledge_context()

store.add_map(
    {"id": "strait", "title": "Strait chart, 18th century", "image_uri": "http://img.example/strait.jpg",
     "width": 4000, "height": 3000}
)

user = UserRef(id="u-anna", display_name="Anna")
annotation = store.create_annotation(
    "strait",
    shape=[(900, 700), (2400, 700), (2400, 1900), (900, 1900)],
    body_text=GIBRALTAR_SAMPLE_TEXT,
    creator=user,
    condition="SMT_CTX",
)
print(f"created annotation {annotation.uri}")

suggestions = merge_suggestions([suggest_from_text(annotation.body_text, context)], cap=15)
chips = store.attach_suggestions(annotation.id, suggestions)
print(f"\n{len(chips)} suggested chips attached (all neutral):")
print("  " + ", ".join(t.label for t in chips))

# Accept five, reject two: one click accepts, a second click rejects.
for tag in chips[:5]:
    store.cycle_tag_state(annotation.id, tag.key)
for tag in chips[5:7]:
    store.cycle_tag_state(annotation.id, tag.key)
    store.cycle_tag_state(annotation.id, tag.key)

print("\nchip states after clicking:")
for tag in annotation.tags.values():
    print(f"  {tag.state.value:<8} {tag.label}")

print("\npositive set:", sorted(store.graph.positive_set(annotation.uri))[:3], "...")
print("negative set:", sorted(store.graph.negative_set(annotation.uri)))

print("\nrelevance judgments derived from the graph:")
for tag, target, sign in store.graph.relevance_judgments()[:5]:
    print(f"  {sign:+d}  {tag}")

document = json.loads(store.serialize_open_annotation(annotation.id))
print(f"\npublished document has {len(document['body']) - 1} tag bodies + 1 text body")
print(f"target selector: {document['target']['selector']['value'][:60]}...")

hits = store.search("Gibraltar")
print(f"\nsearch for 'Gibraltar' finds: {[(h.kind, h.id) for h in hits]}")
