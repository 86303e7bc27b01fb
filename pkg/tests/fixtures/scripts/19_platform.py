import platform

name = platform.system()
release = platform.release()
