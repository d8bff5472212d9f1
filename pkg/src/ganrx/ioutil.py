"""Small file-writing helpers."""

import os
import tempfile


def atomic_write(path, payload: bytes) -> None:
    """Write bytes to path via a temp file + rename so readers never see a
    partial file. The temp file lives in the destination directory (rename
    must not cross filesystems) and is removed on failure."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-ganrx-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
