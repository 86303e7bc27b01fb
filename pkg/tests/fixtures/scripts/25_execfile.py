execfile("legacy_loader.py")
