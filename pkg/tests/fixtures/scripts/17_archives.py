import tarfile
import zipfile

archive = tarfile.open("bundle.tar")
zf = zipfile.ZipFile("bundle.zip")
