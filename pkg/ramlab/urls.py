from django.contrib import admin
from django.urls import path

urlpatterns = [
    # Experiment history browser
    path('admin/', admin.site.urls),
]
