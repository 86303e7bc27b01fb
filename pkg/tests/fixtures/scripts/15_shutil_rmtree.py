import shutil

shutil.rmtree("/nonexistent/fixture-path")
