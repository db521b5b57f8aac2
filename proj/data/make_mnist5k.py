"""Convert the 5000-sample MNIST subset shipped in the mlxtend wheel to IDX.

Usage: python3 make_mnist5k.py path/to/mlxtend-*.whl
Writes mnist5k/images-idx3-ubyte.gz and mnist5k/labels-idx1-ubyte.gz.
"""
import gzip
import struct
import sys
import zipfile

whl = zipfile.ZipFile(sys.argv[1])
rows = gzip.decompress(whl.read("mlxtend/data/data/mnist_5k.csv.gz")).decode().split()
pixels = bytearray()
labels = bytearray()
for row in rows:
    values = [int(v) for v in row.split(",")]
    pixels.extend(values[:-1])
    labels.append(values[-1])
n = len(labels)
with gzip.GzipFile("mnist5k/images-idx3-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">IIII", 0x803, n, 28, 28) + bytes(pixels))
with gzip.GzipFile("mnist5k/labels-idx1-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">II", 0x801, n) + bytes(labels))
