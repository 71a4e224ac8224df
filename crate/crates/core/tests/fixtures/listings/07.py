import os
import urllib.parse
import sqlite3

SQL = """
SELECT p.ZAUTHOR, p.ZTITLE, e.ZTITLE, e.ZASSETURL, e.ZPUBDATE
from ZMTEPISODE e
join ZMTPODCAST p
    on e.ZPODCASTUUID = p.ZUUID
where ZASSETURL NOTNULL;
"""


def check_imports():
    ''' Prompts for password to install dependencies, if needed '''
    import os, importlib, importlib.util
    import urllib.parse

    # Check for dependency installs
    # Can be done more simply, but this way I can avoid importing anything from zmodel,
    # which is nice since I can see what's going on.
    for k, v in DEPS.items():
        try:
            importlib.import_module(k)
        except ImportError as e:
            importlib.util.find_spec(k)
            if importlib.util.find_spec(k) is None:
                os.system(f'pip install {v}')
