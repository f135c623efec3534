"""Turn keyword folders into task plane coordinates.

A field is a folder of text files whose names are the vocabulary; a task
item lists its field and the keywords it contains. The presence bit
vector, split into halves and read as two binary numbers, places the task
at integer (x, y) coordinates.
"""

import tempfile
from pathlib import Path

from shoal import dispatcher

root = Path(tempfile.mkdtemp())

math_field = root / "Fields" / "Math"
math_field.mkdir(parents=True)
for keyword in "abcdefghij":
    (math_field / f"{keyword}.txt").write_text("")

items = root / "Items"
items.mkdir()
(items / "t1.txt").write_text("Math\nh\nf\nc\nb\na\n")
(items / "t2.txt").write_text("Math\na\nj\n")

fields = dispatcher.load_fields(root / "Fields")
field = fields[0]
print(f"field {field.name!r} with keywords {' '.join(field.keywords)}")

for item in dispatcher.load_items(items, fields):
    bits = dispatcher.encode_bits(field, item)
    lower, upper = dispatcher.split_halves(bits)
    coords = dispatcher.coordinates(field, item)
    print(f"\nitem {item.name!r} keywords {sorted(item.keywords)}")
    print(f"  presence bits (LSB first): {bits}")
    print(f"  lower half {lower} -> {dispatcher.bits_to_decimal(lower)}")
    print(f"  upper half {upper} -> {dispatcher.bits_to_decimal(upper)}")
    print(f"  coordinates: ({coords.x}, {coords.y})")

size_x, size_y = dispatcher.plane_size(field)
print(f"\nthe {field.name} plane spans [0, {size_x}) x [0, {size_y})")
